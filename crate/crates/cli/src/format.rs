//! The JSON decomposition file.
//!
//! Field elements are written as integer labels (little-endian base-`p`
//! digits), so a file can be diffed and checked by hand. Key order follows
//! the struct declarations.

use std::sync::Arc;

use kmul_core::builder::{AlgorithmPlan, SubKind, Verification};
use kmul_core::field::BaseField;
use kmul_core::{ExtField, KMulAlgorithm, Poly, SubMode, TensorDecomposition, Term};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionFile {
    pub format_version: u32,
    pub characteristic: u32,
    /// Modulus of `F_q` over `F_p`, ascending; `[0, 1]` for a prime field.
    pub base_modulus: Vec<u32>,
    pub n: usize,
    /// Modulus `Q` of `F_{q^n}` over `F_q`, ascending labels.
    pub ext_modulus: Vec<u32>,
    pub k: usize,
    pub terms: Vec<TermRecord>,
    pub provenance: ProvenanceRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    pub forms: Vec<Vec<u32>>,
    pub output: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceRecord {
    pub mode: String,
    /// `k(n-1) + 1`
    pub target: usize,
    pub divisor_multiplicity: usize,
    pub degrees: Vec<DegreeRecord>,
    /// Evaluation places as ascending label vectors, in plan order.
    pub places: Vec<Vec<u32>>,
    pub verification: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeRecord {
    pub degree: usize,
    pub count: usize,
    pub rank: u64,
    pub kind: String,
}

pub fn kind_label(kind: SubKind) -> String {
    match kind {
        SubKind::Scalar => "scalar".into(),
        SubKind::Builtin => "builtin".into(),
        SubKind::Recursive => "recursive".into(),
        SubKind::Composed { inner_degree } => format!("composed-{inner_degree}"),
        SubKind::Naive => "naive".into(),
    }
}

pub fn verification_label(v: &Verification) -> String {
    match v {
        Verification::Exhaustive { tuples } => format!("exhaustive:{tuples}"),
        Verification::Randomized { samples } => format!("randomized:{samples}"),
    }
}

fn provenance(plan: &AlgorithmPlan, mode: SubMode, verification: &Verification) -> ProvenanceRecord {
    ProvenanceRecord {
        mode: mode.to_string(),
        target: plan.target,
        divisor_multiplicity: plan.divisor_multiplicity,
        degrees: plan
            .degrees
            .iter()
            .map(|d| DegreeRecord {
                degree: d.degree,
                count: d.count,
                rank: d.rank as u64,
                kind: kind_label(d.kind),
            })
            .collect(),
        places: plan.places.iter().map(|p| p.coeffs().to_vec()).collect(),
        verification: verification_label(verification),
    }
}

impl DecompositionFile {
    pub fn from_algorithm(
        alg: &KMulAlgorithm,
        dec: &TensorDecomposition,
        mode: SubMode,
        verification: &Verification,
    ) -> Self {
        let field = dec.field();
        let base = field.base();
        DecompositionFile {
            format_version: FORMAT_VERSION,
            characteristic: base.characteristic(),
            base_modulus: base.modulus().to_vec(),
            n: dec.n(),
            ext_modulus: field.modulus().to_vec(dec.n() + 1),
            k: dec.k(),
            terms: dec
                .terms()
                .iter()
                .map(|t| TermRecord {
                    forms: t.forms.clone(),
                    output: t.output.clone(),
                })
                .collect(),
            provenance: provenance(alg.plan(), mode, verification),
        }
    }

    pub fn base_field(&self) -> Result<Arc<BaseField>, String> {
        if self.format_version != FORMAT_VERSION {
            return Err(format!("unsupported format version {}", self.format_version));
        }
        BaseField::new(self.characteristic as u64, self.base_modulus.clone())
            .map_err(|e| format!("base field: {e}"))
    }

    pub fn ext_field(&self) -> Result<ExtField, String> {
        let base = self.base_field()?;
        if self.ext_modulus.len() != self.n + 1 {
            return Err(format!(
                "ext_modulus has {} coefficients, expected {}",
                self.ext_modulus.len(),
                self.n + 1
            ));
        }
        ExtField::new(base, Poly::new(self.ext_modulus.clone())).map_err(|e| format!("extension field: {e}"))
    }

    /// Rebuilds the decomposition, checking shapes and labels.
    pub fn decomposition(&self) -> Result<TensorDecomposition, String> {
        let field = self.ext_field()?;
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                forms: t.forms.clone(),
                output: t.output.clone(),
            })
            .collect();
        TensorDecomposition::new(field, self.k, terms).map_err(|e| format!("terms: {e}"))
    }

    pub fn mode(&self) -> Result<SubMode, String> {
        self.provenance.mode.parse().map_err(|e| format!("provenance mode: {e}"))
    }

    /// JSON with one line per top-level key and per term, trailing newline.
    pub fn to_json(&self) -> String {
        fn c<T: Serialize>(v: &T) -> String {
            serde_json::to_string(v).expect("plain data serializes")
        }
        let mut s = String::from("{\n");
        s += &format!("  \"format_version\": {},\n", self.format_version);
        s += &format!("  \"characteristic\": {},\n", self.characteristic);
        s += &format!("  \"base_modulus\": {},\n", c(&self.base_modulus));
        s += &format!("  \"n\": {},\n", self.n);
        s += &format!("  \"ext_modulus\": {},\n", c(&self.ext_modulus));
        s += &format!("  \"k\": {},\n", self.k);
        s += "  \"terms\": [";
        for (i, t) in self.terms.iter().enumerate() {
            s += if i == 0 { "\n    " } else { ",\n    " };
            s += &c(t);
        }
        s += if self.terms.is_empty() { "],\n" } else { "\n  ],\n" };
        s += &format!("  \"provenance\": {}\n}}\n", c(&self.provenance));
        s
    }

    pub fn from_json(s: &str) -> Result<Self, String> {
        serde_json::from_str(s).map_err(|e| format!("malformed decomposition file: {e}"))
    }
}
