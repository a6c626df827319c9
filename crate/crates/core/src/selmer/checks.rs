//! Global duality, lozenge diagrams and the invariant computations of the
//! core-vertex arguments, evaluated on synthetic models.

use serde::Serialize;

use super::linalg::{InvariantSeq, Submodule};
use super::model::{
    dual_structure, modify_structure, precedes, selmer_module, LocalCondition, SelmerStructureSpec, Sign,
    SyntheticDualityModel,
};
use super::SelmerError;

#[derive(Clone, Debug, Serialize)]
pub struct DualityPart {
    pub sign: Sign,
    /// `log_p` of `H_F`, `H_G`, `H_{F*}`, `H_{G*}`.
    pub h_f: u32,
    pub h_g: u32,
    pub h_f_dual: u32,
    pub h_g_dual: u32,
    /// `log_p #(⊕ G_v / F_v)`.
    pub quotient: u32,
    /// `log_p` of the images of `H_G` and `H_{F*}` in their local quotients.
    pub image: u32,
    pub dual_image: u32,
    pub orthogonal: bool,
    pub sizes_consistent: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DualityRecord {
    pub parts: Vec<DualityPart>,
    /// `G* ⪯ F*`.
    pub duals_reversed: bool,
    pub pass: bool,
}

/// Both localization images for `F ⪯ G` and the claim that they are exact
/// orthogonal complements under the summed local pairings.
pub fn check_global_duality(
    model: &SyntheticDualityModel,
    f: &SelmerStructureSpec,
    g: &SelmerStructureSpec,
) -> Result<DualityRecord, SelmerError> {
    if !precedes(model, f, g)? {
        return Err(SelmerError::NotNested);
    }
    let fd = dual_structure(model, f)?;
    let gd = dual_structure(model, g)?;
    let duals_reversed = precedes(model, &gd, &fd)?;
    let j = model.form();
    let mut parts = Vec::new();
    for s in Sign::BOTH {
        let l = model.lagrangian(s);
        let (sf, sg) = (f.local_sum(model, s)?, g.local_sum(model, s)?);
        let (sfd, sgd) = (fd.local_sum(model, s)?, gd.local_sum(model, s)?);
        let (hf, hg) = (l.intersect(&sf), l.intersect(&sg));
        let (hfd, hgd) = (l.intersect(&sfd), l.intersect(&sgd));
        // images as subgroups containing the local subgroup they are taken modulo
        let im = hg.sum(&sf);
        let im_dual = hfd.sum(&sgd);
        let orthogonal = im_dual.same_as(&im.perp(&j));
        let image = im.length() - sf.length();
        let dual_image = im_dual.length() - sgd.length();
        let quotient = sg.length() - sf.length();
        let sizes_consistent = hg.length() == hf.length() + image
            && hfd.length() == hgd.length() + dual_image
            && image + dual_image == quotient;
        parts.push(DualityPart {
            sign: s,
            h_f: hf.length(),
            h_g: hg.length(),
            h_f_dual: hfd.length(),
            h_g_dual: hgd.length(),
            quotient,
            image,
            dual_image,
            orthogonal,
            sizes_consistent,
            pass: orthogonal && sizes_consistent,
        });
    }
    let pass = duals_reversed && parts.iter().all(|p| p.pass);
    Ok(DualityRecord { parts, duals_reversed, pass })
}

/// Cokernel lengths of one eigenspace of both lozenge diagrams. In the
/// first diagram `a: H_F(c) ⊆ H_F^l(c)`, `b: H_F(cl) ⊆ H_F^l(c)`,
/// `c: H_F_l(c) ⊆ H_F(c)`, `d: H_F_l(c) ⊆ H_F(cl)`. Starred labels sit on
/// the dual inclusions: `a*: H_F^l(c)* ⊆ H_F(c)*`, `b*: H_F^l(c)* ⊆ H_F(cl)*`,
/// `c*: H_F(c)* ⊆ H_F_l(c)*`, `d*: H_F(cl)* ⊆ H_F_l(c)*`.
#[derive(Clone, Debug, Serialize)]
pub struct LozengePart {
    pub sign: Sign,
    pub a: u32,
    pub b: u32,
    pub c: u32,
    pub d: u32,
    pub a_dual: u32,
    pub b_dual: u32,
    pub c_dual: u32,
    pub d_dual: u32,
    pub bounded: bool,
    pub sums_equal: bool,
    pub dual_pairs_sum_to_m: bool,
    pub inequalities: bool,
    pub intersections: bool,
}

impl LozengePart {
    pub fn pass(&self) -> bool {
        self.bounded && self.sums_equal && self.dual_pairs_sum_to_m && self.inequalities && self.intersections
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LozengeReport {
    pub m: u32,
    pub l: usize,
    pub c: Vec<usize>,
    pub parts: Vec<LozengePart>,
    pub pass: bool,
}

fn cokernel(sub: &Submodule, sup: &Submodule, arrow: &'static str, sign: Sign) -> Result<u32, SelmerError> {
    if !sub.is_within(sup) {
        return Err(SelmerError::NotNested);
    }
    if !sub.cokernel_is_cyclic_in(sup) {
        return Err(SelmerError::NonCyclicCokernel { arrow, sign });
    }
    Ok(sup.length() - sub.length())
}

/// The lozenge diagrams comparing conductors `c` and `c l`.
pub fn lozenge(
    model: &SyntheticDualityModel,
    f: &SelmerStructureSpec,
    c: &[usize],
    l: usize,
) -> Result<LozengeReport, SelmerError> {
    let n = model.places();
    if l >= n {
        return Err(SelmerError::PlaceOutOfRange(l));
    }
    if c.contains(&l) {
        return Err(SelmerError::Overlap(l));
    }
    if f.conditions.get(l) != Some(&LocalCondition::Kummer) {
        return Err(SelmerError::Precondition(format!("place {l} must carry the Kummer condition")));
    }
    let mut cl = c.to_vec();
    cl.push(l);
    let f_c = modify_structure(f, &[], &[], c)?;
    let f_cl = modify_structure(f, &[], &[], &cl)?;
    let f_up = modify_structure(f, &[l], &[], c)?;
    let f_down = modify_structure(f, &[], &[l], c)?;
    let h = |s: &SelmerStructureSpec| selmer_module(model, s);
    let hd = |s: &SelmerStructureSpec| -> Result<_, SelmerError> { selmer_module(model, &dual_structure(model, s)?) };
    let (h_c, h_cl, h_up, h_down) = (h(&f_c)?, h(&f_cl)?, h(&f_up)?, h(&f_down)?);
    let (d_c, d_cl, d_up, d_down) = (hd(&f_c)?, hd(&f_cl)?, hd(&f_up)?, hd(&f_down)?);
    let m = model.ring().m;
    let mut parts = Vec::new();
    for s in Sign::BOTH {
        let a = cokernel(h_c.part(s), h_up.part(s), "a", s)?;
        let b = cokernel(h_cl.part(s), h_up.part(s), "b", s)?;
        let cc = cokernel(h_down.part(s), h_c.part(s), "c", s)?;
        let d = cokernel(h_down.part(s), h_cl.part(s), "d", s)?;
        let a_dual = cokernel(d_up.part(s), d_c.part(s), "a*", s)?;
        let b_dual = cokernel(d_up.part(s), d_cl.part(s), "b*", s)?;
        let c_dual = cokernel(d_c.part(s), d_down.part(s), "c*", s)?;
        let d_dual = cokernel(d_cl.part(s), d_down.part(s), "d*", s)?;
        let all = [a, b, cc, d, a_dual, b_dual, c_dual, d_dual];
        parts.push(LozengePart {
            sign: s,
            a,
            b,
            c: cc,
            d,
            a_dual,
            b_dual,
            c_dual,
            d_dual,
            bounded: all.iter().all(|&x| x <= m),
            sums_equal: a + cc == b + d && a_dual + c_dual == b_dual + d_dual,
            dual_pairs_sum_to_m: [a + a_dual, b + b_dual, cc + c_dual, d + d_dual].iter().all(|&x| x == m),
            inequalities: a >= d && b >= cc && c_dual >= b_dual && d_dual >= a_dual,
            intersections: h_c.part(s).intersect(h_cl.part(s)).same_as(h_down.part(s))
                && d_c.part(s).intersect(d_cl.part(s)).same_as(d_up.part(s)),
        });
    }
    let pass = parts.iter().all(LozengePart::pass);
    Ok(LozengeReport { m, l, c: c.to_vec(), parts, pass })
}

/// The sign on which `H_F` is `Z/p^m` when the other part is trivial.
pub fn core_vertex_sign(model: &SyntheticDualityModel, f: &SelmerStructureSpec) -> Result<Option<Sign>, SelmerError> {
    let h = selmer_module(model, f)?;
    let m = model.ring().m;
    Ok(Sign::BOTH
        .into_iter()
        .find(|&s| h.invariants(s).as_slice() == [m] && h.invariants(s.flip()).as_slice().is_empty()))
}

fn require_self_dual(f: &SelmerStructureSpec) -> Result<(), SelmerError> {
    if f.conditions.iter().all(LocalCondition::is_self_dual_label) {
        Ok(())
    } else {
        Err(SelmerError::Precondition("structure must be Kummer or transverse at every place".into()))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReplayReport {
    pub eps: Sign,
    pub m: u32,
    /// `log_p #H_{F_0}^eps` after making place `q` stringent.
    pub m_prime: u32,
    pub t: u32,
    pub expected_eps: InvariantSeq,
    pub expected_other: InvariantSeq,
    pub computed_eps: InvariantSeq,
    pub computed_other: InvariantSeq,
    pub pass: bool,
}

/// At a core vertex `F`, replace the Kummer condition at `q` by its index
/// `p^t` sublattice and compute the invariants of the dual Selmer module
/// on both eigenspaces; compare with `(m, t + m' - m)` and `(t)`.
pub fn replay_core_vertex_invariants(
    model: &SyntheticDualityModel,
    f: &SelmerStructureSpec,
    q: usize,
    t: u32,
) -> Result<ReplayReport, SelmerError> {
    require_self_dual(f)?;
    let m = model.ring().m;
    if t >= m {
        return Err(SelmerError::Precondition(format!("t = {t} must be below m = {m}")));
    }
    if f.conditions.get(q) != Some(&LocalCondition::Kummer) {
        return Err(SelmerError::Precondition(format!("place {q} must carry the Kummer condition")));
    }
    let eps = core_vertex_sign(model, f)?.ok_or_else(|| SelmerError::Precondition("not a core vertex".into()))?;
    let mut f0 = f.clone();
    f0.conditions[q] = LocalCondition::Stringent { t };
    let m_prime = selmer_module(model, &f0)?.part(eps).length();
    let dual = selmer_module(model, &dual_structure(model, &f0)?)?;
    let second = t as i64 + m_prime as i64 - m as i64;
    let expected_eps = InvariantSeq::new(vec![m, second.max(0) as u32]);
    let expected_other = InvariantSeq::new(vec![t]);
    let computed_eps = dual.invariants(eps).clone();
    let computed_other = dual.invariants(eps.flip()).clone();
    let pass = second >= 0 && computed_eps == expected_eps && computed_other == expected_other;
    Ok(ReplayReport { eps, m, m_prime, t, expected_eps, expected_other, computed_eps, computed_other, pass })
}

/// Which of two stated invariant transformations the model realizes when
/// a core-vertex search step adds a place `l` to the conductor.
#[derive(Clone, Debug, Serialize)]
pub struct CoreStepReport {
    pub eps: Sign,
    pub m: u32,
    /// `Inv H_F^eps = (m, x_1, x_2, ...)`, `Inv H_F^-eps = (y_1, y_2, ...)`.
    pub x: InvariantSeq,
    pub y: InvariantSeq,
    pub computed_eps: InvariantSeq,
    pub computed_other: InvariantSeq,
    /// `eps` part `(x_3, x_4, ...)`, other part `(m, y_1, y_2, ...)`.
    pub first_variant: [bool; 2],
    /// `eps` part `(x_1, x_2, ...)`, other part `(m, y_3, ...)`.
    pub second_variant: [bool; 2],
    pub y1_equals_y2: bool,
}

/// Requires `Inv H_F^eps` to start with `m`, the localization at `l` to
/// have image of length `m` on `eps` and `y_1` on `-eps`.
pub fn core_vertex_step(
    model: &SyntheticDualityModel,
    f: &SelmerStructureSpec,
    eps: Sign,
    l: usize,
) -> Result<CoreStepReport, SelmerError> {
    require_self_dual(f)?;
    if f.conditions.get(l) != Some(&LocalCondition::Kummer) {
        return Err(SelmerError::Precondition(format!("place {l} must carry the Kummer condition")));
    }
    let m = model.ring().m;
    let h = selmer_module(model, f)?;
    let inv_eps = h.invariants(eps);
    if inv_eps.get(1) != m {
        return Err(SelmerError::Precondition("no free summand of rank one on eps".into()));
    }
    let x = inv_eps.skip(1);
    let y = h.invariants(eps.flip()).clone();
    let down = selmer_module(model, &modify_structure(f, &[], &[l], &[])?)?;
    if h.part(eps).length() - down.part(eps).length() != m
        || h.part(eps.flip()).length() - down.part(eps.flip()).length() != y.get(1)
    {
        return Err(SelmerError::Precondition(format!("place {l} does not localize as required")));
    }
    let next = selmer_module(model, &modify_structure(f, &[], &[], &[l])?)?;
    let computed_eps = next.invariants(eps).clone();
    let computed_other = next.invariants(eps.flip()).clone();
    let first = [computed_eps == x.skip(2), computed_other == y.with(m)];
    let second = [computed_eps == x, computed_other == y.skip(2).with(m)];
    Ok(CoreStepReport {
        eps,
        m,
        y1_equals_y2: y.get(1) == y.get(2),
        x,
        y,
        computed_eps,
        computed_other,
        first_variant: first,
        second_variant: second,
    })
}

#[cfg(test)]
mod tests {
    use super::super::linalg::Zpm;
    use super::super::model::Frame;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn equal_structures_pass_vacuously() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let model = SyntheticDualityModel::random(Zpm::from_order(9).unwrap(), 3, &mut rng);
        let f = SelmerStructureSpec::kummer(3);
        let rec = check_global_duality(&model, &f, &f).unwrap();
        assert!(rec.pass);
        assert!(rec.parts.iter().all(|p| p.quotient == 0 && p.image == 0 && p.dual_image == 0));
        let g = SelmerStructureSpec::uniform(3, LocalCondition::Transverse);
        assert!(matches!(check_global_duality(&model, &f, &g), Err(SelmerError::NotNested)));
    }

    #[test]
    fn lozenge_at_a_place_the_lagrangian_misses() {
        // L = the f-axis at place 0 and the e-axis at place 1 on both parts;
        // the Kummer line at place 1 contains L's component there
        let r = Zpm::from_order(9).unwrap();
        let l = Submodule::span(r, 4, &[vec![0, 1, 0, 0], vec![0, 0, 1, 0]]);
        let model = SyntheticDualityModel::new(r, vec![[Frame::standard(); 2]; 2], l.clone(), l).unwrap();
        let f = SelmerStructureSpec { conditions: vec![LocalCondition::Zero, LocalCondition::Kummer] };
        let rep = lozenge(&model, &f, &[], 1).unwrap();
        assert!(rep.pass, "{rep:?}");
        for p in &rep.parts {
            assert_eq!((p.a, p.b, p.c, p.d), (0, 2, 2, 0));
        }
        assert!(lozenge(&model, &f, &[1], 1).is_err());
        // L meets 0 + V_1 trivially: every Selmer module in the first diagram vanishes
        let l2 = Submodule::span(r, 4, &[vec![1, 0, 1, 0], vec![0, 1, 0, 8]]);
        let model = SyntheticDualityModel::new(r, vec![[Frame::standard(); 2]; 2], l2.clone(), l2).unwrap();
        let rep = lozenge(&model, &f, &[], 1).unwrap();
        assert!(rep.pass);
        for p in &rep.parts {
            assert_eq!((p.a, p.b, p.c, p.d), (0, 0, 0, 0));
            assert_eq!((p.a_dual, p.b_dual, p.c_dual, p.d_dual), (2, 2, 2, 2));
        }
        assert!(lozenge(&model, &f, &[], 0).is_err());
    }

    #[test]
    fn replay_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let r = Zpm::from_order(27).unwrap();
        let f = SelmerStructureSpec::kummer(3);
        let mut found = 0;
        while found < 5 {
            let model = SyntheticDualityModel::random(r, 3, &mut rng);
            if core_vertex_sign(&model, &f).unwrap().is_none() {
                continue;
            }
            found += 1;
            let rep0 = replay_core_vertex_invariants(&model, &f, 0, 0).unwrap();
            assert_eq!(rep0.computed_eps.as_slice(), &[3]);
            assert!(rep0.computed_other.as_slice().is_empty());
            assert!(rep0.pass);
            for t in 1..3 {
                assert!(replay_core_vertex_invariants(&model, &f, 1, t).unwrap().pass);
            }
            assert!(replay_core_vertex_invariants(&model, &f, 0, 3).is_err());
        }
        let model = SyntheticDualityModel::random(r, 2, &mut rng);
        let bad = SelmerStructureSpec { conditions: vec![LocalCondition::Full, LocalCondition::Kummer] };
        assert!(replay_core_vertex_invariants(&model, &bad, 1, 1).is_err());
    }
}
