use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::LawError;

/// Consistency tolerance between the two sides' edge-capacity laws.
pub const CONSISTENCY_TOL: f64 = 1e-9;

/// One vertex type: degree `d`, vertex capacity `w`, and the capacities of
/// its `d` edges (a multiset, stored sorted).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub p: f64,
    pub d: usize,
    pub w: usize,
    pub caps: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoissonSpec {
    pub rate: f64,
    pub w: usize,
    pub cap: usize,
    pub trunc: f64,
}

/// Finitely supported law of `(D, W, {C_i})`.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexLaw {
    atoms: Vec<Atom>,
    poisson: Option<PoissonSpec>,
}

impl VertexLaw {
    /// Validates the atoms and normalizes their probabilities.
    pub fn new(mut atoms: Vec<Atom>) -> Result<Self, LawError> {
        for (i, a) in atoms.iter_mut().enumerate() {
            if !(a.p.is_finite() && a.p >= 0.0) {
                return Err(LawError::InvalidAtom {
                    index: i,
                    reason: format!("probability {} is not a non-negative number", a.p),
                });
            }
            if a.caps.len() != a.d {
                return Err(LawError::InvalidAtom {
                    index: i,
                    reason: format!("degree {} but {} capacities", a.d, a.caps.len()),
                });
            }
            a.caps.sort_unstable();
        }
        atoms.retain(|a| a.p > 0.0);
        let total: f64 = atoms.iter().map(|a| a.p).sum();
        if atoms.is_empty() || !total.is_finite() {
            return Err(LawError::Empty);
        }
        atoms.iter_mut().for_each(|a| a.p /= total);
        Ok(VertexLaw { atoms, poisson: None })
    }

    /// Single deterministic vertex type.
    pub fn point(w: usize, caps: Vec<usize>) -> Self {
        VertexLaw::new(vec![Atom { p: 1.0, d: caps.len(), w, caps }]).expect("point law is valid")
    }

    /// Poisson(`rate`) degree with fixed capacity `w` and edge capacity
    /// `cap`, truncated at the smallest degree leaving tail mass `≤ trunc`.
    pub fn poisson(rate: f64, w: usize, cap: usize, trunc: f64) -> Result<Self, LawError> {
        if !(rate.is_finite() && rate >= 0.0) || !(trunc > 0.0 && trunc < 1.0) {
            return Err(LawError::InvalidPoisson { rate, trunc });
        }
        let mut atoms = Vec::new();
        let mut pk = (-rate).exp();
        let mut cdf = 0.0;
        let mut k = 0usize;
        loop {
            atoms.push(Atom { p: pk, d: k, w, caps: vec![cap; k] });
            cdf += pk;
            if 1.0 - cdf <= trunc || (k as f64 > rate && pk < trunc * 1e-3) {
                break;
            }
            k += 1;
            pk *= rate / k as f64;
        }
        let mut law = VertexLaw::new(atoms)?;
        law.poisson = Some(PoissonSpec { rate, w, cap, trunc });
        Ok(law)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn poisson_spec(&self) -> Option<PoissonSpec> {
        self.poisson
    }

    pub fn mean_degree(&self) -> f64 {
        self.atoms.iter().map(|a| a.p * a.d as f64).sum()
    }

    pub fn mean_w(&self) -> f64 {
        self.atoms.iter().map(|a| a.p * a.w as f64).sum()
    }

    pub fn max_w(&self) -> usize {
        self.atoms.iter().map(|a| a.w).max().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.atoms.iter().map(|a| a.d).max().unwrap_or(0)
    }

    /// Edge capacities carried by some atom.
    pub fn cap_classes(&self) -> BTreeSet<usize> {
        self.atoms.iter().flat_map(|a| a.caps.iter().copied()).collect()
    }

    /// `E[Σ_i 1(C_i = c)]`.
    pub fn cap_mass(&self, c: usize) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.p * a.caps.iter().filter(|&&x| x == c).count() as f64)
            .sum()
    }

    /// Applies `f` to every atom, keeping probabilities.
    pub fn map_atoms<F: FnMut(&Atom) -> Atom>(&self, f: F) -> Result<Self, LawError> {
        VertexLaw::new(self.atoms.iter().map(f).collect())
    }
}

/// Law of the vertex at the far end of an edge of capacity `c0`: the
/// remaining degree, its capacity and its other edge capacities.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeBiasedLaw {
    pub c0: usize,
    pub atoms: Vec<Atom>,
}

/// Degree-biased conditional law given one edge of capacity `c0`. An atom
/// with `k` edges of capacity `c0` gets weight `∝ p·k`.
pub fn size_biased(phi: &VertexLaw, c0: usize) -> Result<SizeBiasedLaw, LawError> {
    let mut atoms = Vec::new();
    for a in phi.atoms() {
        let k = a.caps.iter().filter(|&&c| c == c0).count();
        if k == 0 {
            continue;
        }
        let mut caps = a.caps.clone();
        let pos = caps.iter().position(|&c| c == c0).unwrap();
        caps.remove(pos);
        atoms.push(Atom { p: a.p * k as f64, d: a.d - 1, w: a.w, caps });
    }
    let total: f64 = atoms.iter().map(|a| a.p).sum();
    if total <= 0.0 {
        return Err(LawError::ZeroMass { c0 });
    }
    atoms.iter_mut().for_each(|a| a.p /= total);
    Ok(SizeBiasedLaw { c0, atoms })
}

/// Whether both sides induce the same law for the capacity of a uniformly
/// chosen edge.
pub fn check_consistency(phi_a: &VertexLaw, phi_b: &VertexLaw) -> bool {
    let (da, db) = (phi_a.mean_degree(), phi_b.mean_degree());
    if da == 0.0 || db == 0.0 {
        return da == 0.0 && db == 0.0;
    }
    let classes: BTreeSet<usize> = phi_a.cap_classes().union(&phi_b.cap_classes()).copied().collect();
    classes
        .iter()
        .all(|&c| (phi_a.cap_mass(c) / da - phi_b.cap_mass(c) / db).abs() <= CONSISTENCY_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atom_validation() {
        let bad = Atom { p: 1.0, d: 2, w: 1, caps: vec![1] };
        assert!(matches!(VertexLaw::new(vec![bad]), Err(LawError::InvalidAtom { .. })));
        assert_eq!(VertexLaw::new(vec![]), Err(LawError::Empty));
        let law = VertexLaw::new(vec![
            Atom { p: 2.0, d: 1, w: 1, caps: vec![1] },
            Atom { p: 2.0, d: 0, w: 1, caps: vec![] },
        ])
        .unwrap();
        assert!((law.atoms()[0].p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn size_biased_cuckoo_item() {
        let phi = VertexLaw::point(2, vec![1, 1, 1]);
        let sb = size_biased(&phi, 1).unwrap();
        assert_eq!(sb.atoms, vec![Atom { p: 1.0, d: 2, w: 2, caps: vec![1, 1] }]);
        assert_eq!(size_biased(&phi, 2), Err(LawError::ZeroMass { c0: 2 }));
    }

    #[test]
    fn size_biased_prefers_high_degree() {
        let phi = VertexLaw::new(vec![
            Atom { p: 0.5, d: 1, w: 1, caps: vec![1] },
            Atom { p: 0.5, d: 3, w: 1, caps: vec![1; 3] },
        ])
        .unwrap();
        let sb = size_biased(&phi, 1).unwrap();
        let p3: f64 = sb.atoms.iter().filter(|a| a.d == 2).map(|a| a.p).sum();
        assert!((p3 - 0.75).abs() < 1e-15);
    }

    #[test]
    fn size_biased_multiplicity() {
        // atom with caps {1, 2, 2}: conditioned on a capacity-2 edge it has weight 2p
        let phi = VertexLaw::new(vec![
            Atom { p: 0.5, d: 3, w: 2, caps: vec![2, 1, 2] },
            Atom { p: 0.5, d: 1, w: 2, caps: vec![2] },
        ])
        .unwrap();
        let sb = size_biased(&phi, 2).unwrap();
        assert!((sb.atoms[0].p - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(sb.atoms[0].caps, vec![1, 2]);
        assert_eq!(sb.atoms[1].caps, Vec::<usize>::new());
    }

    #[test]
    fn size_biased_poisson_is_poisson() {
        let rate = 2.7;
        let phi = VertexLaw::poisson(rate, 3, 1, 1e-14).unwrap();
        let sb = size_biased(&phi, 1).unwrap();
        let mut pk = (-rate).exp();
        for (k, a) in sb.atoms.iter().enumerate() {
            assert_eq!(a.d, k);
            assert!((a.p - pk).abs() < 1e-10);
            pk *= rate / (k + 1) as f64;
        }
    }

    #[test]
    fn poisson_truncation() {
        let phi = VertexLaw::poisson(3.0, 1, 1, 1e-12).unwrap();
        assert!((phi.mean_degree() - 3.0).abs() < 1e-9);
        assert!(VertexLaw::poisson(-1.0, 1, 1, 1e-12).is_err());
        let empty = VertexLaw::poisson(0.0, 1, 1, 1e-12).unwrap();
        assert_eq!(empty.mean_degree(), 0.0);
    }

    #[test]
    fn consistency_examples() {
        for tau in [0.1, 0.5, 1.3] {
            let a = VertexLaw::point(1, vec![1, 1]);
            let b = VertexLaw::poisson(2.0 * tau, 1, 1, 1e-12).unwrap();
            assert!(check_consistency(&a, &b));
        }
        let a = VertexLaw::point(1, vec![1, 1]);
        let b = VertexLaw::point(1, vec![2, 2]);
        assert!(!check_consistency(&a, &b));
    }
}
