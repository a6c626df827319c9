//! Exhaustive and seeded sweeps over synthetic models, tallied into a
//! JSON-serializable ledger.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::checks::{check_global_duality, core_vertex_sign, core_vertex_step, lozenge, replay_core_vertex_invariants};
use super::linalg::{brute_invariants, enumerate_span, pair, Submodule, Zpm};
use super::model::{
    dual_structure, precedes, selmer_module, symplectic_form, Frame, LocalCondition, SelmerStructureSpec, Sign,
    SyntheticDualityModel,
};
use super::SelmerError;

const MAX_FAILURES: usize = 5;
/// Largest `#L^±` enumerated by the brute-force oracle.
const ORACLE_LIMIT: u64 = 20_000;

#[derive(Clone, Debug, Default, Serialize)]
pub struct Tally {
    pub total: u64,
    pub passed: u64,
    pub failures: Vec<String>,
}

impl Tally {
    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.total += 1;
        if ok {
            self.passed += 1;
        } else if self.failures.len() < MAX_FAILURES {
            self.failures.push(what());
        }
    }

    fn merge(&mut self, other: Tally) {
        self.total += other.total;
        self.passed += other.passed;
        for f in other.failures {
            if self.failures.len() < MAX_FAILURES {
                self.failures.push(f);
            }
        }
    }

    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }
}

/// How often each stated form of the core-vertex step matched.
#[derive(Clone, Debug, Default, Serialize)]
pub struct CoreStepTally {
    pub instances: u64,
    pub first_variant_eps: u64,
    pub first_variant_other: u64,
    pub second_variant_eps: u64,
    pub second_variant_other: u64,
    pub y1_equals_y2: u64,
}

impl CoreStepTally {
    fn merge(&mut self, o: CoreStepTally) {
        self.instances += o.instances;
        self.first_variant_eps += o.first_variant_eps;
        self.first_variant_other += o.first_variant_other;
        self.second_variant_eps += o.second_variant_eps;
        self.second_variant_other += o.second_variant_other;
        self.y1_equals_y2 += o.y1_equals_y2;
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct LabLedger {
    pub mode: String,
    pub p: u64,
    pub m: u32,
    pub pm: u64,
    pub places: usize,
    pub trials: u64,
    pub seed: u64,
    pub checks: BTreeMap<String, Tally>,
    pub core_step: CoreStepTally,
    pub pass: bool,
}

impl LabLedger {
    fn new(mode: &str, r: Zpm, places: usize, trials: u64, seed: u64) -> LabLedger {
        LabLedger { mode: mode.into(), p: r.p, m: r.m, pm: r.q, places, trials, seed, ..Default::default() }
    }

    fn tally(&mut self, name: &str) -> &mut Tally {
        self.checks.entry(name.to_string()).or_default()
    }

    fn merge(&mut self, other: LabLedger) {
        for (k, v) in other.checks {
            self.tally(&k).merge(v);
        }
        self.core_step.merge(other.core_step);
    }

    fn finish(mut self) -> LabLedger {
        self.pass = self.checks.values().all(Tally::all_passed);
        self
    }

    pub fn count(&self, name: &str) -> u64 {
        self.checks.get(name).map_or(0, |t| t.total)
    }
}

/// Invariants of `H_F` by enumerating `L` and testing membership place by
/// place against enumerated local conditions.
fn oracle_invariants(
    model: &SyntheticDualityModel,
    f: &SelmerStructureSpec,
    s: Sign,
) -> Result<super::linalg::InvariantSeq, SelmerError> {
    let r = model.ring();
    let locals = f
        .conditions
        .iter()
        .enumerate()
        .map(|(v, c)| Ok(enumerate_span(&r, 2, c.submodule(model, v, s)?.gens())))
        .collect::<Result<Vec<HashSet<Vec<u64>>>, SelmerError>>()?;
    let l = model.lagrangian(s);
    let h: HashSet<Vec<u64>> = enumerate_span(&r, l.dim(), l.gens())
        .into_iter()
        .filter(|x| locals.iter().enumerate().all(|(v, set)| set.contains(&x[2 * v..2 * v + 2])))
        .collect();
    Ok(brute_invariants(&r, &h))
}

fn oracle_fits(model: &SyntheticDualityModel) -> bool {
    (model.ring().q as f64).powi(model.places() as i32) <= ORACLE_LIMIT as f64
}

/// Checks that only need one structure: oracle agreement, place-order
/// independence and biduality.
fn single_structure_checks(
    led: &mut LabLedger,
    model: &SyntheticDualityModel,
    f: &SelmerStructureSpec,
    perm: &[usize],
) -> Result<(), SelmerError> {
    let h = selmer_module(model, f)?;
    if oracle_fits(model) {
        for s in Sign::BOTH {
            let o = oracle_invariants(model, f, s)?;
            led.tally("selmer_module_vs_enumeration")
                .record(&o == h.invariants(s), || format!("{f:?} {s:?}: {} vs {o}", h.invariants(s)));
        }
    }
    let hp = selmer_module(&model.permuted(perm), &f.permuted(perm))?;
    let same = Sign::BOTH.iter().all(|&s| h.invariants(s) == hp.invariants(s));
    led.tally("place_order_independence").record(same, || format!("{f:?} perm {perm:?}"));
    let dd = dual_structure(model, &dual_structure(model, f)?)?;
    let mut ok = true;
    for (v, (a, b)) in f.conditions.iter().zip(&dd.conditions).enumerate() {
        for s in Sign::BOTH {
            ok &= a.submodule(model, v, s)?.same_as(&b.submodule(model, v, s)?);
        }
    }
    led.tally("biduality").record(ok, || format!("{f:?}"));
    Ok(())
}

fn duality_pair(
    led: &mut LabLedger,
    model: &SyntheticDualityModel,
    f: &SelmerStructureSpec,
    g: &SelmerStructureSpec,
) -> Result<(), SelmerError> {
    if precedes(model, f, g)? {
        let rec = check_global_duality(model, f, g)?;
        led.tally("global_duality").record(rec.pass, || format!("{f:?} <= {g:?}: {rec:?}"));
    } else {
        let rejected = matches!(check_global_duality(model, f, g), Err(SelmerError::NotNested));
        led.tally("non_nested_rejected").record(rejected, || format!("{f:?} vs {g:?}"));
    }
    Ok(())
}

fn lozenge_check(
    led: &mut LabLedger,
    model: &SyntheticDualityModel,
    f: &SelmerStructureSpec,
    c: &[usize],
    l: usize,
) -> Result<(), SelmerError> {
    let rep = lozenge(model, f, c, l);
    let ok = matches!(&rep, Ok(r) if r.pass);
    led.tally("lozenge").record(ok, || format!("{f:?} c={c:?} l={l}: {rep:?}"));
    Ok(())
}

fn core_step_checks(
    led: &mut LabLedger,
    model: &SyntheticDualityModel,
    f: &SelmerStructureSpec,
) -> Result<(), SelmerError> {
    for eps in Sign::BOTH {
        for l in 0..model.places() {
            let Ok(rep) = core_vertex_step(model, f, eps, l) else { continue };
            let t = &mut led.core_step;
            t.instances += 1;
            t.first_variant_eps += rep.first_variant[0] as u64;
            t.first_variant_other += rep.first_variant[1] as u64;
            t.second_variant_eps += rep.second_variant[0] as u64;
            t.second_variant_other += rep.second_variant[1] as u64;
            t.y1_equals_y2 += rep.y1_equals_y2 as u64;
            // the eps part is forced by the lozenge identities
            led.tally("core_step_eps_part").record(rep.second_variant[0], || format!("{rep:?}"));
        }
    }
    Ok(())
}

fn replay_check(
    led: &mut LabLedger,
    model: &SyntheticDualityModel,
    f: &SelmerStructureSpec,
    q: usize,
    t: u32,
) -> Result<(), SelmerError> {
    let rep = replay_core_vertex_invariants(model, f, q, t)?;
    led.tally("replay_core_vertex_invariants").record(rep.pass, || format!("{rep:?}"));
    Ok(())
}

/// All Lagrangians of the standard symplectic `F_p^4`.
pub fn all_lagrangians_rank4(r: &Zpm) -> Vec<Submodule> {
    assert_eq!(r.m, 1, "enumeration is over a field");
    let j = symplectic_form(r, 2);
    let vecs: Vec<Vec<u64>> = (0..r.q.pow(4))
        .map(|mut k| {
            (0..4)
                .map(|_| {
                    let d = k % r.q;
                    k /= r.q;
                    d
                })
                .collect()
        })
        .collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, a) in vecs.iter().enumerate() {
        for b in &vecs[i + 1..] {
            if pair(r, &j, a, b) != 0 {
                continue;
            }
            let s = Submodule::span(*r, 4, &[a.clone(), b.clone()]);
            if s.length() != 2 {
                continue;
            }
            let mut key: Vec<Vec<u64>> = enumerate_span(r, 4, s.gens()).into_iter().collect();
            key.sort();
            if seen.insert(key) {
                out.push(s);
            }
        }
    }
    out
}

/// Every labelling of a 2-place model over `F_3`, for every Lagrangian on
/// each eigenspace.
pub fn exhaustive_pm3() -> Result<LabLedger, SelmerError> {
    let r = Zpm::new(3, 1)?;
    let lags = all_lagrangians_rank4(&r);
    let labels = LocalCondition::labels(r.m);
    let structures: Vec<SelmerStructureSpec> = labels
        .iter()
        .flat_map(|a| labels.iter().map(move |b| SelmerStructureSpec { conditions: vec![a.clone(), b.clone()] }))
        .collect();
    let k = lags.len();
    let parts: Vec<Result<LabLedger, SelmerError>> = (0..k)
        .into_par_iter()
        .map(|i| {
            let mut led = LabLedger::new("exhaustive", r, 2, 0, 0);
            let frames = vec![[Frame::standard(); 2]; 2];
            let model = SyntheticDualityModel::new(r, frames, lags[i].clone(), lags[(7 * i + 3) % k].clone())?;
            for f in &structures {
                single_structure_checks(&mut led, &model, f, &[1, 0])?;
                for g in &structures {
                    duality_pair(&mut led, &model, f, g)?;
                }
                if f.conditions.iter().all(LocalCondition::is_self_dual_label) {
                    core_step_checks(&mut led, &model, f)?;
                    for q in 0..2 {
                        if f.conditions[q] == LocalCondition::Kummer && core_vertex_sign(&model, f)?.is_some() {
                            replay_check(&mut led, &model, f, q, 0)?;
                        }
                    }
                }
            }
            for l in 0..2 {
                let o = 1 - l;
                for label in &labels {
                    let mut conditions = vec![LocalCondition::Kummer; 2];
                    conditions[o] = label.clone();
                    lozenge_check(&mut led, &model, &SelmerStructureSpec { conditions }, &[], l)?;
                }
                lozenge_check(&mut led, &model, &SelmerStructureSpec::kummer(2), &[o], l)?;
            }
            Ok(led)
        })
        .collect();
    let mut led = LabLedger::new("exhaustive", r, 2, k as u64, 0);
    for p in parts {
        led.merge(p?);
    }
    Ok(led.finish())
}

/// Every pair of subgroup-valued structures on a few 2-place models over
/// `F_3`, not just labelled ones.
pub fn exhaustive_subgroups_pm3(models: usize) -> Result<LabLedger, SelmerError> {
    let r = Zpm::new(3, 1)?;
    let lags = all_lagrangians_rank4(&r);
    // subgroups of F_3^2: zero, the four lines, everything
    let mut subs: Vec<Vec<[u64; 2]>> = vec![vec![]];
    for line in [[1, 0], [0, 1], [1, 1], [1, 2]] {
        subs.push(vec![line]);
    }
    subs.push(vec![[1, 0], [0, 1]]);
    let conds: Vec<LocalCondition> = subs
        .iter()
        .flat_map(|p| subs.iter().map(move |m| LocalCondition::Custom { plus: p.clone(), minus: m.clone() }))
        .collect();
    let structures: Vec<SelmerStructureSpec> = conds
        .iter()
        .flat_map(|a| conds.iter().map(move |b| SelmerStructureSpec { conditions: vec![a.clone(), b.clone()] }))
        .collect();
    let k = lags.len();
    let parts: Vec<Result<LabLedger, SelmerError>> = (0..models.min(k))
        .into_par_iter()
        .map(|i| {
            let mut led = LabLedger::new("exhaustive_subgroups", r, 2, 0, 0);
            let idx = i * k / models.min(k);
            let frames = vec![[Frame::standard(); 2]; 2];
            let model = SyntheticDualityModel::new(r, frames, lags[idx].clone(), lags[(7 * idx + 3) % k].clone())?;
            for f in &structures {
                for g in &structures {
                    if precedes(&model, f, g)? {
                        duality_pair(&mut led, &model, f, g)?;
                    }
                }
            }
            Ok(led)
        })
        .collect();
    let mut led = LabLedger::new("exhaustive_subgroups", r, 2, models as u64, 0);
    for p in parts {
        led.merge(p?);
    }
    Ok(led.finish())
}

fn random_condition<R: Rng>(r: &Zpm, rng: &mut R) -> LocalCondition {
    let labels = LocalCondition::labels(r.m);
    if rng.gen_bool(0.7) {
        return labels[rng.gen_range(0..labels.len())].clone();
    }
    let mut gens = || -> Vec<[u64; 2]> {
        (0..rng.gen_range(0..=2))
            .map(|_| {
                let k = r.pow_p(rng.gen_range(0..r.m));
                [r.mul(k, rng.gen_range(0..r.q)), r.mul(k, rng.gen_range(0..r.q))]
            })
            .collect()
    };
    LocalCondition::Custom { plus: gens(), minus: gens() }
}

/// A random condition inside `g` at place `v`.
fn random_subcondition<R: Rng>(
    model: &SyntheticDualityModel,
    v: usize,
    g: &LocalCondition,
    rng: &mut R,
) -> Result<LocalCondition, SelmerError> {
    let r = model.ring();
    if rng.gen_bool(0.5) {
        let cand = random_condition(&r, rng);
        let inside = Sign::BOTH
            .iter()
            .map(|&s| Ok(cand.submodule(model, v, s)?.is_within(&g.submodule(model, v, s)?)))
            .collect::<Result<Vec<bool>, SelmerError>>()?;
        if inside.iter().all(|&b| b) {
            return Ok(cand);
        }
    }
    let mut pick = |s: Sign| -> Result<Vec<[u64; 2]>, SelmerError> {
        let sub = g.submodule(model, v, s)?;
        Ok((0..rng.gen_range(0..=2))
            .map(|_| {
                let mut x = [0u64; 2];
                for b in sub.gens() {
                    let c = rng.gen_range(0..r.q);
                    x[0] = r.add(x[0], r.mul(c, b[0]));
                    x[1] = r.add(x[1], r.mul(c, b[1]));
                }
                x
            })
            .collect())
    };
    Ok(LocalCondition::Custom { plus: pick(Sign::Plus)?, minus: pick(Sign::Minus)? })
}

fn self_dual_structure<R: Rng>(n: usize, rng: &mut R) -> SelmerStructureSpec {
    let conditions =
        (0..n).map(|_| if rng.gen_bool(0.7) { LocalCondition::Kummer } else { LocalCondition::Transverse }).collect();
    SelmerStructureSpec { conditions }
}

fn random_trial(r: Zpm, places: usize, seed: u64, i: u64) -> Result<LabLedger, SelmerError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    let mut led = LabLedger::new("random", r, places, 1, seed);
    let model = SyntheticDualityModel::random(r, places, &mut rng);
    let g = SelmerStructureSpec { conditions: (0..places).map(|_| random_condition(&r, &mut rng)).collect() };
    let f = SelmerStructureSpec {
        conditions: g
            .conditions
            .iter()
            .enumerate()
            .map(|(v, gc)| random_subcondition(&model, v, gc, &mut rng))
            .collect::<Result<_, _>>()?,
    };
    duality_pair(&mut led, &model, &f, &g)?;
    let other = SelmerStructureSpec { conditions: (0..places).map(|_| random_condition(&r, &mut rng)).collect() };
    duality_pair(&mut led, &model, &other, &g)?;
    let mut perm: Vec<usize> = (0..places).collect();
    perm.shuffle(&mut rng);
    single_structure_checks(&mut led, &model, &g, &perm)?;
    // lozenge at a Kummer place with an arbitrary structure elsewhere
    let l = rng.gen_range(0..places);
    let mut lz = other.clone();
    lz.conditions[l] = LocalCondition::Kummer;
    let c: Vec<usize> = (0..places).filter(|&v| v != l && rng.gen_bool(0.4)).collect();
    lozenge_check(&mut led, &model, &lz, &c, l)?;
    let sd = self_dual_structure(places, &mut rng);
    core_step_checks(&mut led, &model, &sd)?;
    Ok(led)
}

/// `trials` independent seeded trials on `places`-place models; trial `i`
/// uses ChaCha stream `i` of `seed`, so results do not depend on scheduling.
pub fn run_lab(pm: u64, places: usize, trials: u64, seed: u64) -> Result<LabLedger, SelmerError> {
    let r = Zpm::from_order(pm)?;
    if places == 0 {
        return Err(SelmerError::Precondition("at least one place".into()));
    }
    let parts: Vec<Result<LabLedger, SelmerError>> =
        (0..trials).into_par_iter().map(|i| random_trial(r, places, seed, i)).collect();
    let mut led = LabLedger::new("random", r, places, trials, seed);
    for p in parts {
        led.merge(p?);
    }
    Ok(led.finish())
}

/// Seeded core-vertex models: rejection-sample Lagrangians until the
/// Kummer-type structure is a core vertex, then replay the stringent
/// computation at a random Kummer place and random `t < m`.
pub fn replay_trials(pm: u64, places: usize, count: u64, seed: u64) -> Result<LabLedger, SelmerError> {
    let r = Zpm::from_order(pm)?;
    if places == 0 {
        return Err(SelmerError::Precondition("at least one place".into()));
    }
    let parts: Vec<Result<LabLedger, SelmerError>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5e1_3e7);
            rng.set_stream(i);
            let mut led = LabLedger::new("replay", r, places, 1, seed);
            loop {
                let model = SyntheticDualityModel::random(r, places, &mut rng);
                let mut f = self_dual_structure(places, &mut rng);
                let q = rng.gen_range(0..places);
                f.conditions[q] = LocalCondition::Kummer;
                if core_vertex_sign(&model, &f)?.is_none() {
                    continue;
                }
                let t = rng.gen_range(0..r.m);
                replay_check(&mut led, &model, &f, q, t)?;
                return Ok(led);
            }
        })
        .collect();
    let mut led = LabLedger::new("replay", r, places, count, seed);
    for p in parts {
        led.merge(p?);
    }
    Ok(led.finish())
}
