//! Builders for the lattice models studied in this crate.

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum};

/// 1D Heisenberg chain,
///
/// ```text
///   H = J Σ_i (XᵢXᵢ₊₁ + YᵢYᵢ₊₁ + ZᵢZᵢ₊₁) + h_z Σ_i Zᵢ,
/// ```
///
/// with a wrap-around bond iff `periodic`.
pub fn build_heisenberg(n: usize, j: f64, h_z: f64, periodic: bool) -> Result<PauliSum> {
    if n < 2 {
        return Err(Error::InvalidModel(format!(
            "Heisenberg chain needs n >= 2 sites, got {n}"
        )));
    }
    let mut terms = Vec::new();
    for (a, b) in chain_bonds(n, periodic) {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            terms.push((j, PauliString::from_sites(n, &[(a, p), (b, p)])?));
        }
    }
    for i in 0..n {
        terms.push((h_z, PauliString::single(n, i, Pauli::Z)?));
    }
    PauliSum::from_terms(n, terms)
}

/// 1D transverse-field Ising chain,
///
/// ```text
///   H = J Σ_i ZᵢZᵢ₊₁ + h_x Σ_i Xᵢ + h_z Σ_i Zᵢ.
/// ```
pub fn build_tfim(n: usize, j: f64, h_x: f64, h_z: f64, periodic: bool) -> Result<PauliSum> {
    if n < 2 {
        return Err(Error::InvalidModel(format!(
            "Ising chain needs n >= 2 sites, got {n}"
        )));
    }
    let mut terms = Vec::new();
    for (a, b) in chain_bonds(n, periodic) {
        terms.push((
            j,
            PauliString::from_sites(n, &[(a, Pauli::Z), (b, Pauli::Z)])?,
        ));
    }
    for i in 0..n {
        terms.push((h_x, PauliString::single(n, i, Pauli::X)?));
        terms.push((h_z, PauliString::single(n, i, Pauli::Z)?));
    }
    PauliSum::from_terms(n, terms)
}

/// 1D Fermi-Hubbard chain,
///
/// ```text
///   H = −t Σ_{i,σ} (ĉ†_{iσ} ĉ_{i+1,σ} + h.c.) + U Σ_i n̂_{i↑} n̂_{i↓},
/// ```
///
/// Jordan-Wigner encoded on `2·n_sites` qubits with all spin-up modes first
/// (qubit `i` = mode `i↑`, qubit `n_sites + i` = mode `i↓`). Hopping between
/// adjacent modes expands to `(XZ…ZX + YZ…ZY)/2` chains (the Z string is
/// empty for nearest neighbours in this ordering); the interaction expands to
/// `(I−Z)(I−Z)/4` products.
pub fn build_fermi_hubbard_1d(n_sites: usize, t_hop: f64, u: f64) -> Result<PauliSum> {
    if n_sites < 2 {
        return Err(Error::InvalidModel(format!(
            "Fermi-Hubbard chain needs n_sites >= 2, got {n_sites}"
        )));
    }
    let n = 2 * n_sites;
    let mut terms = Vec::new();
    // Hopping, per spin block.
    for spin in 0..2 {
        let offset = spin * n_sites;
        for i in 0..n_sites - 1 {
            let (p, q) = (offset + i, offset + i + 1);
            for letter in [Pauli::X, Pauli::Y] {
                let mut sites = vec![(p, letter), (q, letter)];
                for mid in p + 1..q {
                    sites.push((mid, Pauli::Z));
                }
                terms.push((-t_hop / 2.0, PauliString::from_sites(n, &sites)?));
            }
        }
    }
    // On-site interaction: U n̂_{i↑} n̂_{i↓} with n̂ = (I − Z)/2.
    for i in 0..n_sites {
        let (up, dn) = (i, n_sites + i);
        terms.push((u / 4.0, PauliString::identity(n)));
        terms.push((-u / 4.0, PauliString::single(n, up, Pauli::Z)?));
        terms.push((-u / 4.0, PauliString::single(n, dn, Pauli::Z)?));
        terms.push((
            u / 4.0,
            PauliString::from_sites(n, &[(up, Pauli::Z), (dn, Pauli::Z)])?,
        ));
    }
    PauliSum::from_terms(n, terms)
}

/// Total particle-number operator `Σ_q (I − Z_q)/2` on the Jordan-Wigner
/// register of a Fermi-Hubbard chain.
pub fn particle_number_operator(n_sites: usize) -> Result<PauliSum> {
    let n = 2 * n_sites;
    let mut terms = vec![(n as f64 / 2.0, PauliString::identity(n))];
    for q in 0..n {
        terms.push((-0.5, PauliString::single(n, q, Pauli::Z)?));
    }
    PauliSum::from_terms(n, terms)
}

fn chain_bonds(n: usize, periodic: bool) -> Vec<(usize, usize)> {
    let mut bonds: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    if periodic {
        bonds.push((n - 1, 0));
    }
    bonds
}
