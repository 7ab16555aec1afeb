use std::collections::BTreeMap;
use std::fmt;

/// Handle into a [`Symbols`] table.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct AtomId(pub u32);

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Reality {
    Real,
    Complex,
}

#[derive(Clone, Debug)]
pub struct AtomInfo {
    pub name: String,
    pub reality: Reality,
    /// Whether the atom may depend on the fiber coordinate.  The fiber
    /// derivative annihilates atoms with this flag unset.
    pub r_dependent: bool,
    /// Conjugate partner; equals the atom itself when real.
    pub conj: AtomId,
}

/// Registry of the free symbols an algebra works over.  Ids are dense and
/// stable; conjugate pairs are registered together so conjugation is a
/// table lookup.
#[derive(Clone, Debug, Default)]
pub struct Symbols {
    atoms: Vec<AtomInfo>,
    by_name: BTreeMap<String, AtomId>,
}

impl Symbols {
    pub fn new() -> Self {
        Self::default()
    }

    fn insert(&mut self, info: AtomInfo) -> AtomId {
        assert!(
            !self.by_name.contains_key(&info.name),
            "duplicate symbol `{}`",
            info.name
        );
        let id = AtomId(self.atoms.len() as u32);
        self.by_name.insert(info.name.clone(), id);
        self.atoms.push(info);
        id
    }

    /// Register a real symbol.
    pub fn real(&mut self, name: &str, r_dependent: bool) -> AtomId {
        let id = AtomId(self.atoms.len() as u32);
        self.insert(AtomInfo {
            name: name.to_string(),
            reality: Reality::Real,
            r_dependent,
            conj: id,
        })
    }

    /// Register a complex symbol together with its conjugate partner and
    /// return `(id, conj_id)`.
    pub fn complex_pair(&mut self, name: &str, conj_name: &str, r_dependent: bool) -> (AtomId, AtomId) {
        let id = AtomId(self.atoms.len() as u32);
        let conj_id = AtomId(self.atoms.len() as u32 + 1);
        self.insert(AtomInfo {
            name: name.to_string(),
            reality: Reality::Complex,
            r_dependent,
            conj: conj_id,
        });
        self.insert(AtomInfo {
            name: conj_name.to_string(),
            reality: Reality::Complex,
            r_dependent,
            conj: id,
        });
        (id, conj_id)
    }

    pub fn lookup(&self, name: &str) -> Option<AtomId> {
        self.by_name.get(name).copied()
    }

    pub fn info(&self, id: AtomId) -> &AtomInfo {
        &self.atoms[id.0 as usize]
    }

    pub fn name(&self, id: AtomId) -> &str {
        &self.atoms[id.0 as usize].name
    }

    pub fn conj(&self, id: AtomId) -> AtomId {
        self.atoms[id.0 as usize].conj
    }

    pub fn is_real(&self, id: AtomId) -> bool {
        self.atoms[id.0 as usize].reality == Reality::Real
    }

    pub fn r_dependent(&self, id: AtomId) -> bool {
        self.atoms[id.0 as usize].r_dependent
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = AtomId> + '_ {
        (0..self.atoms.len() as u32).map(AtomId)
    }
}

impl fmt::Display for AtomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Ids of the symbols every preset algebra registers, in a fixed order so
/// ids are reproducible across runs.
#[derive(Clone, Copy, Debug)]
pub struct StdAtoms {
    /// Rotation coefficient of the contact form (complex, with conjugate).
    pub c: AtomId,
    pub cbar: AtomId,
    /// Coframe torsion coefficients (complex pairs).
    pub alpha: AtomId,
    pub alphabar: AtomId,
    pub beta: AtomId,
    pub betabar: AtomId,
    /// Off-diagonal metric datum (complex pair).
    pub x: AtomId,
    pub xbar: AtomId,
    /// Conformal-like factor of the metric; the only standard symbol that
    /// may depend on the fiber coordinate.
    pub p: AtomId,
    /// Real metric datum multiplying the square of the contact form.
    pub hh: AtomId,
    /// Amplitude and phase of the distinguished fiber profile.
    pub a: AtomId,
    pub s: AtomId,
    /// log(a^2), kept as its own symbol so fractional powers of `a` stay
    /// polynomial in the exponential.
    pub loga2: AtomId,
    /// Fiber coordinate.
    pub r: AtomId,
    /// Gauge parameters.
    pub tau: AtomId,
    pub theta: AtomId,
    /// Candidate closed section (complex pair).
    pub psi: AtomId,
    pub psibar: AtomId,
    /// Base coordinates, for user-supplied profile expressions.
    pub x1: AtomId,
    pub x2: AtomId,
    pub x3: AtomId,
}

impl StdAtoms {
    pub fn register(sym: &mut Symbols) -> Self {
        let (c, cbar) = sym.complex_pair("c", "cbar", false);
        let (alpha, alphabar) = sym.complex_pair("alpha", "alphabar", false);
        let (beta, betabar) = sym.complex_pair("beta", "betabar", false);
        let (x, xbar) = sym.complex_pair("x", "xbar", false);
        let p = sym.real("P", true);
        let hh = sym.real("H", false);
        let a = sym.real("a", false);
        let s = sym.real("s", false);
        let loga2 = sym.real("loga2", false);
        let r = sym.real("r", true);
        let tau = sym.real("tau", false);
        let theta = sym.real("theta", false);
        let (psi, psibar) = sym.complex_pair("psi", "psibar", false);
        let x1 = sym.real("x1", false);
        let x2 = sym.real("x2", false);
        let x3 = sym.real("x3", false);
        StdAtoms {
            c,
            cbar,
            alpha,
            alphabar,
            beta,
            betabar,
            x,
            xbar,
            p,
            hh,
            a,
            s,
            loga2,
            r,
            tau,
            theta,
            psi,
            psibar,
            x1,
            x2,
            x3,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugation_is_involutive() {
        let mut sym = Symbols::new();
        let std = StdAtoms::register(&mut sym);
        for id in sym.ids() {
            assert_eq!(sym.conj(sym.conj(id)), id);
        }
        assert_eq!(sym.conj(std.c), std.cbar);
        assert_eq!(sym.conj(std.p), std.p);
        assert!(sym.r_dependent(std.p));
        assert!(!sym.r_dependent(std.hh));
    }

    #[test]
    fn lookup_by_name() {
        let mut sym = Symbols::new();
        let std = StdAtoms::register(&mut sym);
        assert_eq!(sym.lookup("alphabar"), Some(std.alphabar));
        assert_eq!(sym.lookup("nope"), None);
    }
}
