//! Generator for the shipped end-to-end fixture under `data/fixture/`.
//!
//! Source A holds thesaurus-indexed records, source B citation-index
//! records. Query hits are split as 968 matched outside the selected
//! categories, 278 matched inside them and 249 absent from B; B adds 179
//! category records absent from A, plus records from unrelated fields.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use bibliomap::records::{write_records, BibRecord, DocType, MeshTerm};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MATCHED_OUTSIDE: usize = 968;
pub const MATCHED_INSIDE: usize = 278;
pub const A_ONLY: usize = 249;
pub const B_ONLY_IN_CATEGORIES: usize = 179;
pub const UNRELATED_B: usize = 700;
pub const NON_HITS_A: usize = 150;

pub const CATEGORIES: [&str; 2] = ["INFECTIOUS DISEASES", "TROPICAL MEDICINE"];
const OTHER_DOMAIN_CATEGORIES: [&str; 6] = [
    "MICROBIOLOGY",
    "IMMUNOLOGY",
    "VIROLOGY",
    "PUBLIC, ENVIRONMENTAL & OCCUPATIONAL HEALTH",
    "PEDIATRICS",
    "MEDICINE, GENERAL & INTERNAL",
];
const UNRELATED_CATEGORIES: [&str; 4] = [
    "ONCOLOGY",
    "CARDIAC & CARDIOVASCULAR SYSTEMS",
    "ENDOCRINOLOGY & METABOLISM",
    "IMMUNOLOGY",
];

pub const THESAURUS: &str = "\
# descriptor\ttree number
Infections\tC01
Bacterial Infections\tC01.150
Tuberculosis\tC01.150.252
Virus Diseases\tC01.925
Coronavirus Infections\tC01.925.782
COVID-19\tC01.925.782.600
HIV Infections\tC01.925.813
Parasitic Diseases\tC01.610
Malaria\tC01.610.752
Vaccines\tD20.215
Bacterial Vaccines\tD20.215.100
Fungal Vaccines\tD20.215.200
Protozoan Vaccines\tD20.215.300
Toxoids\tD20.215.400
Viral Vaccines\tD20.215.500
COVID-19 Vaccines\tD20.215.500.100
Disease Notification\tN05.100
Disease Eradication\tN05.200
Disease Transmission, Infectious\tN05.300
Disease Transmission, Vertical\tN05.300.100
Contact Tracing\tN05.400
Chain of Infection\tN05.500
Disease Outbreaks\tN05.600
Epidemics\tN05.600.100
Pandemics\tN05.600.100.100
Quarantine\tN05.700
Carrier State\tC23.100
Travel-Related Illness\tC23.200
Jet Lag Syndrome\tC23.200.100
Reinfection\tC23.300
Neoplasms\tC04
Breast Neoplasms\tC04.100
Heart Diseases\tC14
Hypertension\tC14.100
Diabetes Mellitus\tC19
";

pub const QUERY: &str = "(\"Infections\"[MH] OR \"Bacterial Vaccines\"[MH] OR \"Fungal Vaccines\"[MH] OR \
\"Protozoan Vaccines\"[MH] OR \"Toxoids\"[MH] OR \"Viral Vaccines\"[MH] OR \"Disease Notification\"[MH] OR \
\"Disease Eradication\"[MH] OR \"Disease Transmission, Infectious\"[MH] OR \"Contact Tracing\"[MH] OR \
\"Carrier State\"[MH] OR \"Chain of Infection\"[MH] OR \"Disease Outbreaks\"[MH] OR \
\"Travel-Related Illness\"[Mesh:NoExp] OR \"Quarantine\"[MH] OR \"Reinfection\"[MH]) AND 2000/01/01:2020/12/01[dp]";

/// Descriptors that satisfy the query (directly or by explosion).
const HIT_DESCRIPTORS: [&str; 24] = [
    "Infections",
    "Bacterial Infections",
    "Tuberculosis",
    "Virus Diseases",
    "Coronavirus Infections",
    "COVID-19",
    "HIV Infections",
    "Parasitic Diseases",
    "Malaria",
    "Bacterial Vaccines",
    "Protozoan Vaccines",
    "Toxoids",
    "Viral Vaccines",
    "COVID-19 Vaccines",
    "Disease Notification",
    "Disease Transmission, Vertical",
    "Contact Tracing",
    "Carrier State",
    "Disease Outbreaks",
    "Epidemics",
    "Pandemics",
    "Travel-Related Illness",
    "Quarantine",
    "Reinfection",
];
const NON_HIT_DESCRIPTORS: [&str; 7] = [
    "Neoplasms",
    "Breast Neoplasms",
    "Heart Diseases",
    "Hypertension",
    "Diabetes Mellitus",
    "Jet Lag Syndrome",
    "Vaccines",
];

/// Keyword topics: (surface variants per term).
const TOPICS: [&[&[&str]]; 7] = [
    &[
        &["malaria", "Malaria"],
        &["plasmodium falciparum", "Plasmodium falciparum"],
        &["dengue", "Dengue", "DENGUE"],
        &["mosquito", "Mosquitoes", "mosquitoes"],
        &["aedes aegypti", "Aedes aegypti"],
        &["zika virus", "Zika virus", "Zika-virus"],
    ],
    &[
        &["HIV", "hiv"],
        &["antiretroviral therapy", "Antiretroviral Therapy"],
        &["AIDS"],
        &["men who have sex with men", "Men who have sex with men"],
        &["pre-exposure prophylaxis", "Pre-exposure prophylaxis"],
    ],
    &[
        &["tuberculosis", "Tuberculosis"],
        &["Mycobacterium tuberculosis", "mycobacterium tuberculosis"],
        &["latent tuberculosis infection", "Latent tuberculosis infection"],
        &["BCG"],
        &["isoniazid", "Isoniazid"],
    ],
    &[
        &["antibiotic resistance", "Antibiotic resistance"],
        &["Staphylococcus aureus", "staphylococcus aureus"],
        &["MRSA"],
        &["biofilm", "Biofilms", "biofilms"],
        &["Escherichia coli", "escherichia coli", "Escherichia  coli"],
    ],
    &[
        &["vaccination", "Vaccination"],
        &["vaccine hesitancy", "Vaccine hesitancy"],
        &["influenza", "Influenza"],
        &["immunization", "Immunization"],
        &["measles", "Measles"],
    ],
    &[
        &["COVID-19", "Covid-19", "COVID", "coronavirus disease 2019"],
        &["SARS-CoV-2", "sars-cov-2", "SARS-CoV2"],
        &[
            "coronavirus",
            "2019-nCoV",
            "coronavirus pandemic",
            "Wuhan seafood market pneumonia virus",
        ],
        &["pandemic", "Pandemic", "pandemics"],
        &["lockdown", "Lockdown"],
    ],
    &[
        &["hepatitis C", "Hepatitis C"],
        &["hepatitis B", "Hepatitis B"],
        &["liver cirrhosis", "Liver cirrhosis"],
        &["hepatocellular carcinoma", "Hépatocellular carcinoma"],
        &["sofosbuvir", "Sofosbuvir"],
    ],
];
const COVID_TOPIC: usize = 5;
const JUNK_KEYWORDS: [&str; 4] = ["***", "-", "§§", "..."];

const UNRELATED_KEYWORDS: [&str; 6] = [
    "breast cancer",
    "chemotherapy",
    "heart failure",
    "atrial fibrillation",
    "insulin resistance",
    "obesity",
];

const COUNTRIES: [(&str, u32); 10] = [
    ("US", 30),
    ("CN", 12),
    ("GB", 10),
    ("FR", 7),
    ("DE", 6),
    ("BR", 5),
    ("IN", 5),
    ("ZA", 4),
    ("IT", 4),
    ("JP", 3),
];

const TITLE_SUBJECTS: [&str; 8] = [
    "Transmission dynamics",
    "Clinical outcomes",
    "Molecular epidemiology",
    "Risk factors",
    "Surveillance",
    "Treatment response",
    "Immune correlates",
    "Cost effectiveness",
];

pub struct Fixture {
    pub source_a: Vec<BibRecord>,
    pub source_b: Vec<BibRecord>,
}

struct Gen {
    rng: ChaCha8Rng,
    serial: u64,
}

impl Gen {
    fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        &xs[self.rng.gen_range(0..xs.len())]
    }

    fn year(&mut self, topic: usize) -> i32 {
        if topic == COVID_TOPIC {
            return 2020;
        }
        // Output grows over the period.
        let u: f64 = self.rng.gen();
        2000 + (21.0 * u.powf(0.75)).floor().min(20.0) as i32
    }

    fn countries(&mut self) -> BTreeSet<String> {
        let n = *self.pick(&[1usize, 1, 1, 2, 2, 3]);
        let total: u32 = COUNTRIES.iter().map(|c| c.1).sum();
        let mut out = BTreeSet::new();
        while out.len() < n {
            let mut x = self.rng.gen_range(0..total);
            for (c, w) in COUNTRIES {
                if x < w {
                    out.insert(c.to_string());
                    break;
                }
                x -= w;
            }
        }
        out
    }

    fn citations(&mut self, year: i32) -> Vec<i32> {
        let n = self.rng.gen_range(0..12);
        let mut c: Vec<i32> = (0..n).map(|_| self.rng.gen_range(year..=2021.max(year))).collect();
        c.sort_unstable();
        c
    }

    fn keywords(&mut self, topic: usize) -> Vec<String> {
        let pool = TOPICS[topic];
        let n = self.rng.gen_range(2..=4);
        let mut idx: Vec<usize> = (0..pool.len()).collect();
        idx.shuffle(&mut self.rng);
        let mut out: Vec<String> = idx[..n].iter().map(|&i| self.pick(pool[i]).to_string()).collect();
        if self.rng.gen_bool(0.2) {
            let other = self.rng.gen_range(0..TOPICS.len());
            if other != COVID_TOPIC {
                let t = self.pick(TOPICS[other]);
                out.push(self.pick(t).to_string());
            }
        }
        out
    }

    fn title(&mut self, topic: usize) -> String {
        self.serial += 1;
        let subject = *self.pick(&TITLE_SUBJECTS);
        let term = TOPICS[topic][0][0];
        format!("{subject} of {term}: cohort {}", self.serial)
    }
}

/// How a matched pair is made linkable.
#[derive(Clone, Copy)]
enum Link {
    Pmid,
    Doi,
    Title,
}

pub fn generate(seed: u64) -> Fixture {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        serial: 0,
    };
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut pmid = 30_000_000u64;
    let mut wos = 1_000_000_000u64;

    fn hit(g: &mut Gen, pmid: &mut u64, topic: usize) -> BibRecord {
        *pmid += 1;
        let year = g.year(topic);
        let mut r = BibRecord::new(Some(&pmid.to_string()), None, year, DocType::Article);
        r.doi = Some(format!("10.1000/fx.{pmid}"));
        r.title = g.title(topic);
        let n = g.rng.gen_range(1..=3);
        for k in 0..n {
            let d = if k == 0 {
                *g.pick(&HIT_DESCRIPTORS)
            } else {
                *g.pick(&NON_HIT_DESCRIPTORS)
            };
            let major = g.rng.gen_bool(0.4);
            r.mesh_terms.push(MeshTerm::new(d, major));
        }
        r
    }

    let total_matched = MATCHED_OUTSIDE + MATCHED_INSIDE;
    let mut inside_flags: Vec<bool> = (0..total_matched).map(|i| i < MATCHED_INSIDE).collect();
    inside_flags.shuffle(&mut g.rng);

    for (i, &inside) in inside_flags.iter().enumerate() {
        let topic = g.rng.gen_range(0..TOPICS.len());
        let ra = hit(&mut g, &mut pmid, topic);
        wos += 1;
        let link = match i % 25 {
            0 | 1 => Link::Doi,
            2 => Link::Title,
            _ => Link::Pmid,
        };
        let mut rb = BibRecord::new(None, Some(&format!("WOS:{wos:012}")), ra.year, DocType::Article);
        match link {
            Link::Pmid => {
                rb.pmid = ra.pmid.clone();
                rb.doi = ra.doi.clone();
                rb.title = ra.title.clone();
            }
            Link::Doi => {
                rb.doi = ra.doi.as_ref().map(|d| format!("https://doi.org/{}", d.to_uppercase()));
                rb.title = ra.title.clone();
            }
            Link::Title => {
                rb.title = format!("{}.", ra.title.to_uppercase());
            }
        }
        rb.doi = rb.doi.and_then(|d| bibliomap::records::normalize_doi(&d));
        rb.countries = g.countries();
        rb.categories = if inside {
            let mut c = BTreeSet::from([g.pick(&CATEGORIES).to_string()]);
            if g.rng.gen_bool(0.3) {
                c.insert(g.pick(&OTHER_DOMAIN_CATEGORIES).to_string());
            }
            c
        } else {
            let mut c = BTreeSet::from([g.pick(&OTHER_DOMAIN_CATEGORIES).to_string()]);
            if g.rng.gen_bool(0.25) {
                c.insert(g.pick(&OTHER_DOMAIN_CATEGORIES).to_string());
            }
            c
        };
        rb.citations = g.citations(rb.year);
        if g.rng.gen_bool(0.6) {
            rb.author_keywords = g.keywords(topic);
            if g.rng.gen_bool(0.01) {
                rb.author_keywords = vec![g.pick(&JUNK_KEYWORDS).to_string()];
            }
        }
        // Records the analysis filters must drop.
        match i % 97 {
            5 => rb.doc_type = DocType::Other,
            17 => rb.retracted = true,
            29 => rb.countries.clear(),
            41 if !inside => rb.categories.clear(),
            _ => {}
        }
        if i % 211 == 7 {
            rb.doc_type = DocType::Letter;
        }
        if i % 173 == 11 {
            rb.doc_type = DocType::Review;
        }
        a.push(ra);
        b.push(rb);
    }

    // Query hits absent from B; two share a title with a pair of unrelated
    // B records and stay unmatched as ambiguous.
    for i in 0..A_ONLY {
        let topic = g.rng.gen_range(0..TOPICS.len());
        let ra = hit(&mut g, &mut pmid, topic);
        if i < 2 {
            for _ in 0..2 {
                wos += 1;
                let mut rb = BibRecord::new(None, Some(&format!("WOS:{wos:012}")), ra.year, DocType::Article);
                rb.title = ra.title.to_lowercase();
                rb.countries = g.countries();
                rb.categories = BTreeSet::from([UNRELATED_CATEGORIES[0].to_string()]);
                b.push(rb);
            }
        }
        a.push(ra);
    }

    // A records outside the query: unrelated descriptors, the non-exploded
    // child of a NoExp term, or a hit descriptor published before 2000.
    for i in 0..NON_HITS_A {
        pmid += 1;
        let year = if i % 3 == 2 { 1999 } else { g.year(0) };
        let mut r = BibRecord::new(Some(&pmid.to_string()), None, year, DocType::Article);
        r.title = g.title(0);
        let d = if i % 3 == 2 {
            *g.pick(&HIT_DESCRIPTORS)
        } else {
            *g.pick(&NON_HIT_DESCRIPTORS)
        };
        r.mesh_terms.push(MeshTerm::new(d, true));
        a.push(r);
    }

    // Category records absent from A.
    for i in 0..B_ONLY_IN_CATEGORIES {
        let topic = g.rng.gen_range(0..TOPICS.len());
        wos += 1;
        let year = g.year(topic);
        let mut rb = BibRecord::new(None, Some(&format!("WOS:{wos:012}")), year, DocType::Article);
        rb.title = g.title(topic);
        rb.countries = g.countries();
        rb.categories = if i % 4 == 0 {
            BTreeSet::from([CATEGORIES[1].to_string()])
        } else {
            BTreeSet::from([CATEGORIES[0].to_string()])
        };
        rb.citations = g.citations(year);
        if g.rng.gen_bool(0.6) {
            rb.author_keywords = g.keywords(topic);
        }
        b.push(rb);
    }

    // Unrelated fields: only part of the all-domain reference totals.
    for _ in 0..UNRELATED_B {
        wos += 1;
        let year = g.year(0);
        let mut rb = BibRecord::new(None, Some(&format!("WOS:{wos:012}")), year, DocType::Article);
        rb.title = format!("Unrelated study {}", wos);
        rb.countries = g.countries();
        rb.categories = BTreeSet::from([g.pick(&UNRELATED_CATEGORIES).to_string()]);
        rb.citations = g.citations(year);
        rb.author_keywords = vec![g.pick(&UNRELATED_KEYWORDS).to_string()];
        b.push(rb);
    }

    // Exact duplicates on both sides.
    for k in [3usize, 400, 900] {
        a.push(a[k].clone());
    }
    for k in [10usize, 500] {
        b.push(b[k].clone());
    }

    a.shuffle(&mut g.rng);
    b.shuffle(&mut g.rng);
    Fixture {
        source_a: a,
        source_b: b,
    }
}

pub const SEED: u64 = 2021;

/// Writes `source_a.jsonl`, `source_b.jsonl` and `thesaurus.tsv`.
pub fn write_fixture(dir: &Path, f: &Fixture) {
    fs::create_dir_all(dir).unwrap();
    let mut buf = Vec::new();
    write_records(&mut buf, &f.source_a).unwrap();
    fs::write(dir.join("source_a.jsonl"), &buf).unwrap();
    buf.clear();
    write_records(&mut buf, &f.source_b).unwrap();
    fs::write(dir.join("source_b.jsonl"), &buf).unwrap();
    fs::write(dir.join("thesaurus.tsv"), THESAURUS).unwrap();
    fs::write(dir.join("query.txt"), format!("{QUERY}\n")).unwrap();
}
