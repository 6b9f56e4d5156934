//! Pauli-string operator algebra.
//!
//! A Hermitian operator is held as a weighted sum of Pauli strings,
//!
//! ```text
//!   H = Σ_l α_l P_l,     α_l ∈ ℝ,
//! ```
//!
//! where each `P_l` is a tensor product of single-qubit Paulis over all `N`
//! qubits (identity letters included, so every string has length `N`).
//! Site numbering starts at zero; basis index `b` carries site `i` in bit
//! `i`, i.e. kets are written `|s₀s₁…s_{N−1}⟩` left to right.

use crate::error::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;

/// Coefficients with magnitude below this are dropped after merging.
pub const COEFF_EPS: f64 = 1e-14;

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A tensor product of Pauli letters over all `N` qubits.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

/// Bit masks describing the action of a string on computational basis
/// states: `P|b⟩ = i^{n_y} (−1)^{popcount(b & z_mask)} |b ⊕ x_mask⟩`.
#[derive(Debug, Clone, Copy)]
pub struct PauliMasks {
    pub x_mask: u64,
    pub z_mask: u64,
    pub y_count: u32,
}

impl PauliMasks {
    /// Scalar factor `i^{n_y}`.
    #[inline]
    pub fn y_phase(&self) -> Complex64 {
        match self.y_count % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Sign `(−1)^{popcount(b & z_mask)}`.
    #[inline]
    pub fn z_sign(&self, b: usize) -> f64 {
        if (b as u64 & self.z_mask).count_ones() & 1 == 1 {
            -1.0
        } else {
            1.0
        }
    }
}

impl PauliString {
    /// The all-identity string on `n` qubits.
    pub fn identity(n: usize) -> PauliString {
        PauliString {
            letters: vec![Pauli::I; n],
        }
    }

    /// A single non-identity letter at `site`, identities elsewhere.
    pub fn single(n: usize, site: usize, p: Pauli) -> Result<PauliString> {
        Self::from_sites(n, &[(site, p)])
    }

    /// Build from explicit (site, letter) pairs; unlisted sites are identity.
    pub fn from_sites(n: usize, sites: &[(usize, Pauli)]) -> Result<PauliString> {
        let mut letters = vec![Pauli::I; n];
        for &(site, p) in sites {
            if site >= n {
                return Err(Error::SiteOutOfRange { site, n });
            }
            letters[site] = p;
        }
        Ok(PauliString { letters })
    }

    /// Parse a letter string such as `"XZI"`.
    pub fn parse(s: &str) -> Result<PauliString> {
        let letters = s
            .chars()
            .map(|c| {
                Pauli::from_char(c)
                    .ok_or_else(|| Error::InvalidArgument(format!("'{c}' is not a Pauli letter")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliString { letters })
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Sites carrying a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn masks(&self) -> PauliMasks {
        debug_assert!(self.letters.len() <= 64);
        let mut x_mask = 0u64;
        let mut z_mask = 0u64;
        let mut y_count = 0u32;
        for (i, &p) in self.letters.iter().enumerate() {
            match p {
                Pauli::I => {}
                Pauli::X => x_mask |= 1 << i,
                Pauli::Y => {
                    x_mask |= 1 << i;
                    z_mask |= 1 << i;
                    y_count += 1;
                }
                Pauli::Z => z_mask |= 1 << i,
            }
        }
        PauliMasks {
            x_mask,
            z_mask,
            y_count,
        }
    }

    /// Two strings commute iff they anticommute on an even number of sites.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let odd = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        odd % 2 == 0
    }

    /// Cyclic shift of all letters by `shift` sites (site i → i + shift mod N).
    pub fn translated(&self, shift: usize) -> PauliString {
        let n = self.letters.len();
        let mut letters = vec![Pauli::I; n];
        for (i, &p) in self.letters.iter().enumerate() {
            letters[(i + shift) % n] = p;
        }
        PauliString { letters }
    }

    /// Accumulate `coeff · P|ψ⟩` into `out`.
    pub fn accumulate_into(&self, coeff: Complex64, psi: &[Complex64], out: &mut [Complex64]) {
        let m = self.masks();
        let scale = coeff * m.y_phase();
        let x = m.x_mask as usize;
        for (b, &amp) in psi.iter().enumerate() {
            out[b ^ x] += scale * m.z_sign(b) * amp;
        }
    }

    /// `⟨ψ|P|ψ⟩`. Real for any normalized state since P is Hermitian.
    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        let m = self.masks();
        let yph = m.y_phase();
        let x = m.x_mask as usize;
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, &amp) in psi.iter().enumerate() {
            acc += psi[b ^ x].conj() * m.z_sign(b) * amp;
        }
        acc *= yph;
        debug_assert!(acc.im.abs() < 1e-9, "Pauli expectation not real: {acc}");
        acc.re
    }
}

impl std::fmt::Display for PauliString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &p in &self.letters {
            write!(f, "{}", p.to_char())?;
        }
        Ok(())
    }
}

/// A Hermitian operator as a real-weighted sum of Pauli strings.
///
/// Always kept canonical: terms sorted lexicographically by letters,
/// duplicates merged, coefficients below [`COEFF_EPS`] dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<(f64, PauliString)>,
}

impl PauliSum {
    /// Empty sum (the zero operator) on `n` qubits.
    pub fn zero(n_qubits: usize) -> PauliSum {
        PauliSum {
            n_qubits,
            terms: Vec::new(),
        }
    }

    /// Build from raw terms. Strings must all have length `n_qubits`.
    pub fn from_terms(n_qubits: usize, terms: Vec<(f64, PauliString)>) -> Result<PauliSum> {
        for (_, s) in &terms {
            if s.len() != n_qubits {
                return Err(Error::DimensionMismatch(format!(
                    "string {s} has length {} but the sum is on {n_qubits} qubits",
                    s.len()
                )));
            }
        }
        let mut sum = PauliSum { n_qubits, terms };
        sum.canonicalize();
        Ok(sum)
    }

    /// Single-string convenience constructor.
    pub fn from_string(coeff: f64, s: PauliString) -> PauliSum {
        let n = s.len();
        PauliSum::from_terms(n, vec![(coeff, s)]).expect("length is consistent by construction")
    }

    fn canonicalize(&mut self) {
        self.terms.sort_by(|a, b| a.1.cmp(&b.1));
        let mut merged: Vec<(f64, PauliString)> = Vec::with_capacity(self.terms.len());
        for (c, s) in self.terms.drain(..) {
            match merged.last_mut() {
                Some((mc, ms)) if *ms == s => *mc += c,
                _ => merged.push((c, s)),
            }
        }
        merged.retain(|(c, _)| c.abs() >= COEFF_EPS);
        self.terms = merged;
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    /// `‖α‖₁ = Σ_l |α_l|`, an upper bound on the operator norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }

    /// Coefficient of the all-identity string, if present.
    pub fn identity_coefficient(&self) -> f64 {
        self.terms
            .iter()
            .find(|(_, s)| s.is_identity())
            .map(|(c, _)| *c)
            .unwrap_or(0.0)
    }

    /// True when no identity component is present (the operator is traceless).
    pub fn is_traceless(&self) -> bool {
        self.identity_coefficient() == 0.0
    }

    /// True when every term has an even number of Y letters, i.e. the dense
    /// matrix is real symmetric.
    pub fn is_real_matrix(&self) -> bool {
        self.terms.iter().all(|(_, s)| s.masks().y_count % 2 == 0)
    }

    /// Multiply all coefficients by `factor`.
    pub fn scaled(&self, factor: f64) -> PauliSum {
        let terms = self
            .terms
            .iter()
            .map(|(c, s)| (c * factor, s.clone()))
            .collect();
        PauliSum::from_terms(self.n_qubits, terms).expect("lengths preserved")
    }

    /// Sum of two operators on the same qubit count.
    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "cannot add sums on {} and {} qubits",
                self.n_qubits, other.n_qubits
            )));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        PauliSum::from_terms(self.n_qubits, terms)
    }

    /// Cyclic translation of every term by `shift` sites.
    pub fn translated(&self, shift: usize) -> PauliSum {
        let terms = self
            .terms
            .iter()
            .map(|(c, s)| (*c, s.translated(shift)))
            .collect();
        PauliSum::from_terms(self.n_qubits, terms).expect("lengths preserved")
    }

    /// `O|ψ⟩` as a fresh vector.
    pub fn apply(&self, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state dim {} vs operator dim {}",
                psi.len(),
                self.dim()
            )));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        for (c, s) in &self.terms {
            s.accumulate_into(Complex64::new(*c, 0.0), psi, &mut out);
        }
        Ok(out)
    }

    /// `⟨ψ|O|ψ⟩ = Σ_l α_l ⟨P_l⟩`.
    pub fn expectation(&self, psi: &[Complex64]) -> Result<f64> {
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state dim {} vs operator dim {}",
                psi.len(),
                self.dim()
            )));
        }
        Ok(self.terms.iter().map(|(c, s)| c * s.expectation(psi)).sum())
    }

    /// Dense matrix reconstruction, the single source of truth at desk scale.
    pub fn to_dense(&self) -> Array2<Complex64> {
        let d = self.dim();
        let mut m = Array2::<Complex64>::zeros((d, d));
        for (c, s) in &self.terms {
            let masks = s.masks();
            let scale = Complex64::new(*c, 0.0) * masks.y_phase();
            let x = masks.x_mask as usize;
            for b in 0..d {
                m[[b ^ x, b]] += scale * masks.z_sign(b);
            }
        }
        m
    }
}

impl std::fmt::Display for PauliSum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, (c, s)) in self.terms.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{c} {s}")?;
        }
        Ok(())
    }
}

/// Parse the Pauli-sum text format: one `<coefficient> <letters>` term per
/// line, `#` starts a comment, blank lines are ignored. Duplicate strings
/// merge by coefficient addition.
pub fn parse_pauli_sum(text: &str) -> Result<PauliSum> {
    let mut terms: Vec<(f64, PauliString)> = Vec::new();
    let mut n_qubits: Option<usize> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let coeff_txt = parts.next().expect("non-empty line has a first token");
        let letters_txt = parts.next().ok_or_else(|| Error::Parse {
            line: line_no,
            msg: "expected '<coefficient> <letters>'".into(),
        })?;
        if parts.next().is_some() {
            return Err(Error::Parse {
                line: line_no,
                msg: "trailing tokens after the Pauli string".into(),
            });
        }
        // Unicode minus shows up in copied operator tables.
        let coeff_txt = coeff_txt.replace('\u{2212}', "-");
        let coeff: f64 = coeff_txt.parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("'{coeff_txt}' is not a real coefficient"),
        })?;
        if !coeff.is_finite() {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("coefficient '{coeff_txt}' is not finite"),
            });
        }
        let string = PauliString::parse(letters_txt).map_err(|e| Error::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        match n_qubits {
            None => n_qubits = Some(string.len()),
            Some(n) if n != string.len() => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!(
                        "string length {} differs from earlier length {n}",
                        string.len()
                    ),
                });
            }
            _ => {}
        }
        terms.push((coeff, string));
    }
    let n = n_qubits.ok_or_else(|| Error::Parse {
        line: 0,
        msg: "no terms found".into(),
    })?;
    PauliSum::from_terms(n, terms)
}
