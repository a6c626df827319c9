//! Synthetic global-duality models and Selmer structures on them.
//!
//! Each place carries `(Z/p^m)^2` per eigenspace with the standard
//! alternating pairing. The two eigenspaces are orthogonal, since a pairing
//! with `<tx, ty> = <x, y>` must vanish between the `+1` and `-1` parts when
//! `p` is odd. The global image is a Lagrangian per eigenspace.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::linalg::{pair, InvariantSeq, Submodule, Zpm};
use super::SelmerError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn index(self) -> usize {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// The two distinguished self-dual lines of one eigenspace at one place.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    pub kummer: [u64; 2],
    pub transverse: [u64; 2],
}

impl Frame {
    pub fn standard() -> Frame {
        Frame { kummer: [1, 0], transverse: [0, 1] }
    }

    /// `(k, t)` from a uniform element of `SL_2(Z/p^m)`.
    pub fn random<R: Rng>(r: &Zpm, rng: &mut R) -> Frame {
        loop {
            let k = [rng.gen_range(0..r.q), rng.gen_range(0..r.q)];
            let t = [rng.gen_range(0..r.q), rng.gen_range(0..r.q)];
            let det = r.sub(r.mul(k[0], t[1]), r.mul(k[1], t[0]));
            if r.is_unit(det) {
                let di = r.unit_inv(det);
                return Frame { kummer: k, transverse: [r.mul(t[0], di), r.mul(t[1], di)] };
            }
        }
    }
}

/// `n` places, `(Z/p^m)^{2n}` per eigenspace with coordinates `(e_v, f_v)`
/// and `<x, y> = sum_v x_{e_v} y_{f_v} - x_{f_v} y_{e_v}`.
#[derive(Clone, Debug)]
pub struct SyntheticDualityModel {
    ring: Zpm,
    frames: Vec<[Frame; 2]>,
    lagrangian: [Submodule; 2],
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelSummary {
    pub p: u64,
    pub m: u32,
    pub places: usize,
    pub frames: Vec<[Frame; 2]>,
    pub lagrangian_plus: Vec<Vec<u64>>,
    pub lagrangian_minus: Vec<Vec<u64>>,
}

/// The alternating form on `(Z/p^m)^{2n}`.
pub fn symplectic_form(r: &Zpm, n: usize) -> Vec<Vec<u64>> {
    let mut j = vec![vec![0; 2 * n]; 2 * n];
    for v in 0..n {
        j[2 * v][2 * v + 1] = 1;
        j[2 * v + 1][2 * v] = r.q - 1;
    }
    j
}

impl SyntheticDualityModel {
    pub fn new(ring: Zpm, frames: Vec<[Frame; 2]>, plus: Submodule, minus: Submodule) -> Result<Self, SelmerError> {
        let n = frames.len();
        if n == 0 {
            return Err(SelmerError::Precondition("a model needs at least one place".into()));
        }
        for (v, fs) in frames.iter().enumerate() {
            for f in fs {
                let det = ring.sub(ring.mul(f.kummer[0], f.transverse[1]), ring.mul(f.kummer[1], f.transverse[0]));
                if !ring.is_unit(det) {
                    return Err(SelmerError::DegenerateFrame(v));
                }
            }
        }
        let j = symplectic_form(&ring, n);
        for (s, l) in Sign::BOTH.iter().zip([&plus, &minus]) {
            let isotropic = l.gens().iter().all(|x| l.gens().iter().all(|y| pair(&ring, &j, x, y) == 0));
            if l.dim() != 2 * n || !isotropic || l.length() != n as u32 * ring.m {
                return Err(SelmerError::NotLagrangian(*s));
            }
        }
        Ok(SyntheticDualityModel { ring, frames, lagrangian: [plus, minus] })
    }

    /// Random frames and random Lagrangians, including non-free ones.
    pub fn random<R: Rng>(ring: Zpm, n: usize, rng: &mut R) -> Self {
        let frames = (0..n).map(|_| [Frame::random(&ring, rng), Frame::random(&ring, rng)]).collect();
        let plus = random_lagrangian(&ring, n, rng);
        let minus = random_lagrangian(&ring, n, rng);
        SyntheticDualityModel::new(ring, frames, plus, minus).expect("random model is valid")
    }

    pub fn ring(&self) -> Zpm {
        self.ring
    }

    pub fn places(&self) -> usize {
        self.frames.len()
    }

    pub fn frame(&self, v: usize, s: Sign) -> Frame {
        self.frames[v][s.index()]
    }

    pub fn lagrangian(&self, s: Sign) -> &Submodule {
        &self.lagrangian[s.index()]
    }

    pub fn form(&self) -> Vec<Vec<u64>> {
        symplectic_form(&self.ring, self.places())
    }

    /// The same model with places listed in the order `perm`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.places();
        let frames = perm.iter().map(|&v| self.frames[v]).collect();
        let move_l = |l: &Submodule| {
            let gens: Vec<Vec<u64>> = l
                .gens()
                .iter()
                .map(|g| {
                    let mut out = vec![0; 2 * n];
                    for (new, &old) in perm.iter().enumerate() {
                        out[2 * new] = g[2 * old];
                        out[2 * new + 1] = g[2 * old + 1];
                    }
                    out
                })
                .collect();
            Submodule::span(self.ring, 2 * n, &gens)
        };
        SyntheticDualityModel::new(self.ring, frames, move_l(&self.lagrangian[0]), move_l(&self.lagrangian[1]))
            .expect("permutation preserves validity")
    }

    pub fn summary(&self) -> ModelSummary {
        ModelSummary {
            p: self.ring.p,
            m: self.ring.m,
            places: self.places(),
            frames: self.frames.clone(),
            lagrangian_plus: self.lagrangian[0].gens().to_vec(),
            lagrangian_minus: self.lagrangian[1].gens().to_vec(),
        }
    }
}

/// `g (span(p^{k_i} e_i, p^{m - k_i} f_i))` for random `k_i` and a random
/// product of symplectic transvections `g`.
pub fn random_lagrangian<R: Rng>(r: &Zpm, n: usize, rng: &mut R) -> Submodule {
    let dim = 2 * n;
    let j = symplectic_form(r, n);
    let mut gens: Vec<Vec<u64>> = Vec::new();
    for i in 0..n {
        let k = rng.gen_range(0..=r.m);
        let mut e = vec![0; dim];
        e[2 * i] = r.pow_p(k);
        let mut f = vec![0; dim];
        f[2 * i + 1] = r.pow_p(r.m - k);
        gens.push(e);
        gens.push(f);
    }
    for _ in 0..4 * dim {
        let v: Vec<u64> = (0..dim).map(|_| rng.gen_range(0..r.q)).collect();
        let c = rng.gen_range(0..r.q);
        for g in gens.iter_mut() {
            // x -> x + c <x, v> v
            let k = r.mul(c, pair(r, &j, g, &v));
            for (a, b) in g.iter_mut().zip(&v) {
                *a = r.add(*a, r.mul(k, *b));
            }
        }
    }
    Submodule::span(*r, dim, &gens)
}

/// A local condition, per place, on both eigenspaces.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LocalCondition {
    Kummer,
    Transverse,
    Full,
    Zero,
    /// `p^t` times the Kummer line.
    Stringent {
        t: u32,
    },
    /// Kummer line plus `p^{m-t}` times everything; the dual of `Stringent`.
    Relaxed {
        t: u32,
    },
    /// Explicit generators in the `(e, f)` coordinates of each eigenspace.
    Custom {
        plus: Vec<[u64; 2]>,
        minus: Vec<[u64; 2]>,
    },
}

impl LocalCondition {
    /// Labelled conditions available at `p^m`, in a fixed order.
    pub fn labels(m: u32) -> Vec<LocalCondition> {
        let mut out =
            vec![LocalCondition::Kummer, LocalCondition::Transverse, LocalCondition::Full, LocalCondition::Zero];
        for t in 1..m {
            out.push(LocalCondition::Stringent { t });
            out.push(LocalCondition::Relaxed { t });
        }
        out
    }

    /// Self-dual labels, the ones allowed in a Kummer-type structure.
    pub fn is_self_dual_label(&self) -> bool {
        matches!(self, LocalCondition::Kummer | LocalCondition::Transverse)
    }

    pub fn submodule(&self, model: &SyntheticDualityModel, v: usize, s: Sign) -> Result<Submodule, SelmerError> {
        let r = model.ring();
        let fr = model.frame(v, s);
        let line = |x: [u64; 2]| Submodule::span(r, 2, &[x.to_vec()]);
        Ok(match self {
            LocalCondition::Kummer => line(fr.kummer),
            LocalCondition::Transverse => line(fr.transverse),
            LocalCondition::Full => Submodule::full(r, 2),
            LocalCondition::Zero => Submodule::zero(r, 2),
            LocalCondition::Stringent { t } | LocalCondition::Relaxed { t } if *t > r.m => {
                return Err(SelmerError::Precondition(format!("t = {t} exceeds m = {}", r.m)))
            }
            LocalCondition::Stringent { t } => line(fr.kummer).scaled(*t),
            LocalCondition::Relaxed { t } => line(fr.kummer).sum(&Submodule::full(r, 2).scaled(r.m - t)),
            LocalCondition::Custom { plus, minus } => {
                let gens = if s == Sign::Plus { plus } else { minus };
                let gens: Vec<Vec<u64>> = gens.iter().map(|g| vec![g[0] % r.q, g[1] % r.q]).collect();
                Submodule::span(r, 2, &gens)
            }
        })
    }

    /// The orthogonal complement, as a label when the label set is closed
    /// under it.
    pub fn dual(&self, model: &SyntheticDualityModel, v: usize) -> Result<LocalCondition, SelmerError> {
        Ok(match self {
            LocalCondition::Kummer => LocalCondition::Kummer,
            LocalCondition::Transverse => LocalCondition::Transverse,
            LocalCondition::Full => LocalCondition::Zero,
            LocalCondition::Zero => LocalCondition::Full,
            LocalCondition::Stringent { t } => LocalCondition::Relaxed { t: *t },
            LocalCondition::Relaxed { t } => LocalCondition::Stringent { t: *t },
            LocalCondition::Custom { .. } => {
                let j = symplectic_form(&model.ring(), 1);
                let perp = |s: Sign| -> Result<Vec<[u64; 2]>, SelmerError> {
                    Ok(self.submodule(model, v, s)?.perp(&j).gens().iter().map(|g| [g[0], g[1]]).collect())
                };
                LocalCondition::Custom { plus: perp(Sign::Plus)?, minus: perp(Sign::Minus)? }
            }
        })
    }
}

/// A local condition at every place of a model.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SelmerStructureSpec {
    pub conditions: Vec<LocalCondition>,
}

impl SelmerStructureSpec {
    pub fn uniform(n: usize, c: LocalCondition) -> Self {
        SelmerStructureSpec { conditions: vec![c; n] }
    }

    pub fn kummer(n: usize) -> Self {
        SelmerStructureSpec::uniform(n, LocalCondition::Kummer)
    }

    fn check(&self, model: &SyntheticDualityModel) -> Result<(), SelmerError> {
        if self.conditions.len() != model.places() {
            return Err(SelmerError::PlaceCount { expected: model.places(), got: self.conditions.len() });
        }
        Ok(())
    }

    /// `⊕_v F_v` inside `(Z/p^m)^{2n}` for one eigenspace.
    pub fn local_sum(&self, model: &SyntheticDualityModel, s: Sign) -> Result<Submodule, SelmerError> {
        self.check(model)?;
        let n = model.places();
        let mut acc = Submodule::zero(model.ring(), 2 * n);
        for (v, c) in self.conditions.iter().enumerate() {
            acc = acc.sum(&c.submodule(model, v, s)?.embed(2 * v, 2 * n));
        }
        Ok(acc)
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        SelmerStructureSpec { conditions: perm.iter().map(|&v| self.conditions[v].clone()).collect() }
    }
}

/// The place-wise orthogonal complement.
pub fn dual_structure(
    model: &SyntheticDualityModel,
    f: &SelmerStructureSpec,
) -> Result<SelmerStructureSpec, SelmerError> {
    f.check(model)?;
    let conditions = f.conditions.iter().enumerate().map(|(v, c)| c.dual(model, v)).collect::<Result<_, _>>()?;
    Ok(SelmerStructureSpec { conditions })
}

/// `F^a_b(c)`: full at `a`, zero at `b`, transverse at `c`.
pub fn modify_structure(
    f: &SelmerStructureSpec,
    a: &[usize],
    b: &[usize],
    c: &[usize],
) -> Result<SelmerStructureSpec, SelmerError> {
    let n = f.conditions.len();
    let mut seen = vec![false; n];
    for &v in a.iter().chain(b).chain(c) {
        if v >= n {
            return Err(SelmerError::PlaceOutOfRange(v));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(SelmerError::Overlap(v));
        }
    }
    let mut out = f.clone();
    for (set, cond) in [(a, LocalCondition::Full), (b, LocalCondition::Zero), (c, LocalCondition::Transverse)] {
        for &v in set {
            out.conditions[v] = cond.clone();
        }
    }
    Ok(out)
}

/// `H_F = {x in L : x_v in F_v for all v}` per eigenspace.
#[derive(Clone, Debug)]
pub struct SelmerModule {
    pub parts: [Submodule; 2],
}

impl SelmerModule {
    pub fn part(&self, s: Sign) -> &Submodule {
        &self.parts[s.index()]
    }

    pub fn invariants(&self, s: Sign) -> &InvariantSeq {
        self.parts[s.index()].invariants()
    }
}

pub fn selmer_module(model: &SyntheticDualityModel, f: &SelmerStructureSpec) -> Result<SelmerModule, SelmerError> {
    let part =
        |s: Sign| -> Result<Submodule, SelmerError> { Ok(model.lagrangian(s).intersect(&f.local_sum(model, s)?)) };
    Ok(SelmerModule { parts: [part(Sign::Plus)?, part(Sign::Minus)?] })
}

/// `F_v ⊆ G_v` at every place on both eigenspaces.
pub fn precedes(
    model: &SyntheticDualityModel,
    f: &SelmerStructureSpec,
    g: &SelmerStructureSpec,
) -> Result<bool, SelmerError> {
    f.check(model)?;
    g.check(model)?;
    for v in 0..model.places() {
        for s in Sign::BOTH {
            if !f.conditions[v].submodule(model, v, s)?.is_within(&g.conditions[v].submodule(model, v, s)?) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_models_are_lagrangian() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for pm in [3, 9, 27] {
            let r = Zpm::from_order(pm).unwrap();
            for n in 1..4 {
                let model = SyntheticDualityModel::random(r, n, &mut rng);
                let j = model.form();
                for s in Sign::BOTH {
                    assert!(model.lagrangian(s).perp(&j).same_as(model.lagrangian(s)));
                }
            }
        }
        let r = Zpm::from_order(9).unwrap();
        let l = Submodule::span(r, 2, &[vec![1, 0], vec![0, 1]]);
        let bad = SyntheticDualityModel::new(r, vec![[Frame::standard(); 2]], l.clone(), l);
        assert!(matches!(bad, Err(SelmerError::NotLagrangian(Sign::Plus))));
    }

    #[test]
    fn label_duals_are_complements() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = Zpm::from_order(27).unwrap();
        let model = SyntheticDualityModel::random(r, 2, &mut rng);
        let j = symplectic_form(&r, 1);
        let mut conds = LocalCondition::labels(r.m);
        conds.push(LocalCondition::Custom { plus: vec![[3, 9]], minus: vec![[1, 2], [0, 9]] });
        for c in conds {
            for s in Sign::BOTH {
                let here = c.submodule(&model, 0, s).unwrap();
                let dual = c.dual(&model, 0).unwrap().submodule(&model, 0, s).unwrap();
                assert!(dual.same_as(&here.perp(&j)), "{c:?}");
            }
        }
        let kum = LocalCondition::Kummer.submodule(&model, 1, Sign::Minus).unwrap();
        let tr = LocalCondition::Transverse.submodule(&model, 1, Sign::Minus).unwrap();
        assert_eq!(kum.intersect(&tr).length(), 0);
        let st = LocalCondition::Stringent { t: 2 }.submodule(&model, 1, Sign::Minus).unwrap();
        let rel = LocalCondition::Relaxed { t: 2 }.submodule(&model, 1, Sign::Minus).unwrap();
        assert_eq!(kum.length() - st.length(), 2);
        assert_eq!(rel.length() - kum.length(), 2);
    }

    #[test]
    fn modification_rules() {
        let f = SelmerStructureSpec::kummer(4);
        assert_eq!(modify_structure(&f, &[], &[], &[]).unwrap(), f);
        let g = modify_structure(&f, &[0], &[1], &[2]).unwrap();
        assert_eq!(modify_structure(&g, &[0], &[1], &[2]).unwrap(), g);
        assert_eq!(g.conditions[3], LocalCondition::Kummer);
        assert!(matches!(modify_structure(&f, &[0], &[0], &[]), Err(SelmerError::Overlap(0))));
        assert!(matches!(modify_structure(&f, &[], &[], &[7]), Err(SelmerError::PlaceOutOfRange(7))));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let model = SyntheticDualityModel::random(Zpm::from_order(9).unwrap(), 4, &mut rng);
        let h = SelmerStructureSpec {
            conditions: vec![
                LocalCondition::Stringent { t: 1 },
                LocalCondition::Full,
                LocalCondition::Kummer,
                LocalCondition::Relaxed { t: 1 },
            ],
        };
        // dual(F^a_b(c)) = (F*)^b_a(c)
        let lhs = dual_structure(&model, &modify_structure(&h, &[0], &[3], &[2]).unwrap()).unwrap();
        let rhs = modify_structure(&dual_structure(&model, &h).unwrap(), &[3], &[0], &[2]).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn trivial_selmer_modules() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let model = SyntheticDualityModel::random(Zpm::from_order(27).unwrap(), 3, &mut rng);
        let full = selmer_module(&model, &SelmerStructureSpec::uniform(3, LocalCondition::Full)).unwrap();
        let zero = selmer_module(&model, &SelmerStructureSpec::uniform(3, LocalCondition::Zero)).unwrap();
        for s in Sign::BOTH {
            assert!(full.part(s).same_as(model.lagrangian(s)));
            assert_eq!(zero.part(s).length(), 0);
        }
        assert!(selmer_module(&model, &SelmerStructureSpec::kummer(2)).is_err());
    }
}
