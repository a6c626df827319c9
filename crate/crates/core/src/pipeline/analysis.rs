//! The end-to-end run for one `(curve, D, p)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::*;
use super::{Config, CurveRecord, Ingested, PipelineError};
use crate::curve::{RationalPoint, SaturationCheck};
use crate::galois::{mod_p_image_surjective, ImageStatus};
use crate::heegner::{heegner_index, heegner_point, verify_distribution, HeegnerError, HeegnerSetup, RecognizedOn};
use crate::kolyvagin::{find_kolyvagin_primes, sha_bounds, KolyvaginError};
use crate::numeric::{is_prime, ord_p};

/// One line of a batch file: `{"label": "37a1", "d": 7, "p": 5}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Job {
    pub label: String,
    pub d: u64,
    pub p: u64,
}

fn heegner_err(e: HeegnerError) -> PipelineError {
    match e {
        HeegnerError::BadDiscriminant(_)
        | HeegnerError::NotFundamental(_)
        | HeegnerError::NotHeegner { .. }
        | HeegnerError::ExtraUnits(_)
        | HeegnerError::BadPrime(_)
        | HeegnerError::ConductorNotCoprime { .. }
        | HeegnerError::NotInert(_)
        | HeegnerError::WrongCurve => PipelineError::Validation(e.to_string()),
        _ => PipelineError::Computation(e.to_string()),
    }
}

fn kolyvagin_err(e: KolyvaginError) -> PipelineError {
    match e {
        KolyvaginError::BadPrime(_) | KolyvaginError::DividesConductor(_) => PipelineError::Validation(e.to_string()),
        _ => PipelineError::Computation(e.to_string()),
    }
}

const HEIGHT_DIGITS: usize = 30;

/// Run every stage for `record` and assemble the report. Deterministic in
/// its inputs; timings are left to the caller.
pub fn analyze(record: &CurveRecord, d: u64, p: u64, config: &Config) -> Result<AnalysisReport, PipelineError> {
    record.validate()?;
    let e = record.curve()?;
    if p == 2 || !is_prime(p) {
        return Err(PipelineError::Validation(format!("p = {p} must be an odd prime")));
    }
    if !e.is_good(p) {
        return Err(PipelineError::Validation(format!("p = {p} divides the conductor {}", e.conductor())));
    }
    if d % p == 0 {
        return Err(PipelineError::Validation(format!("p = {p} divides D = {d}")));
    }
    let setup = HeegnerSetup::new(&e, d, false).map_err(heegner_err)?;
    let mut caveats = Vec::new();

    let verdict =
        mod_p_image_surjective(&e, p, config.sieve_bound).map_err(|err| PipelineError::Validation(err.to_string()))?;
    let overridden = verdict.status != ImageStatus::Surjective;
    if overridden {
        if !config.allow_unverified_hypothesis {
            return Err(PipelineError::HypothesisNotCertified(format!(
                "no Frobenius witness up to {} for {:?}",
                config.sieve_bound, verdict.missing
            )));
        }
        caveats.push(format!(
            "surjectivity mod {p} was not certified (missing {:?}); the bounds below assume it",
            verdict.missing
        ));
    } else {
        caveats.push(format!(
            "surjectivity mod {p} is certified from Frobenius data at good primes; an inconclusive verdict would not have proved the opposite"
        ));
    }

    let hp = heegner_point(&setup, config.precision_digits, config.qseries_max_terms).map_err(heegner_err)?;
    let rec = hp.recognized.as_ref().ok_or_else(|| {
        PipelineError::Computation(format!(
            "y_K was not recognized as a rational point ({:?}) at {} digits",
            hp.status, config.precision_digits
        ))
    })?;
    let heegner = HeegnerSummary {
        status: hp.status,
        eigen: hp.eigen,
        multiplier: hp.multiplier,
        forms: hp.forms.len(),
        qseries_terms: hp.n_terms,
        recognized_on: Some(rec.on),
        twist_d: rec.twist_d,
        point: Some(rec.point.clone()),
        height: Some(rec.height.to_decimal_string(HEIGHT_DIGITS)),
        analytic_height: rec.analytic_height.as_ref().map(|h| h.to_decimal_string(HEIGHT_DIGITS)),
        residual: hp.residual.as_ref().map(|r| r.to_decimal_string(6)),
    };

    // the generator has to live on the curve that carries the point
    let from_record = match (rec.on, record.generator_point()?) {
        (RecognizedOn::Curve, Some(g)) => Some(g),
        (RecognizedOn::Twist, Some(_)) => {
            caveats.push("the record's generator is on E but y_K lies on the twist; searched the twist instead".into());
            None
        }
        (_, None) => None,
    };
    let (g, source) = match from_record {
        Some(g) => (g, GeneratorSource::Record),
        None => {
            let g = rec.curve.search_generator(config.search_height_bound).ok_or_else(|| {
                PipelineError::Computation(format!(
                    "no generator given and none found up to naive height {}",
                    config.search_height_bound
                ))
            })?;
            (g, GeneratorSource::Search)
        }
    };
    if rec.curve.torsion_order_of(&g).is_some() {
        return Err(PipelineError::Validation(format!("generator {g} is torsion")));
    }
    let (saturation, saturation_prime) =
        match rec.curve.saturation_check(&g, p, config.sieve_bound, config.search_height_bound) {
            SaturationCheck::Certified { l } => ("certified".to_string(), Some(l)),
            SaturationCheck::Divisible { q } => {
                return Err(PipelineError::Validation(format!(
                    "generator {g} is divisible by {p}: it is {p} * {q} up to torsion"
                )))
            }
            SaturationCheck::Inconclusive => {
                caveats.push(format!("the generator was not certified {p}-saturated; m0 may be too large"));
                ("inconclusive".to_string(), None)
            }
        };
    caveats.push(match source {
        GeneratorSource::Record => "generator taken from the curve record; only its p-saturation was checked, not that it generates E(Q)/tors".into(),
        GeneratorSource::Search => format!(
            "generator is the least-height non-torsion point with naive height parameter <= {}; only its p-saturation was checked",
            config.search_height_bound
        ),
    });

    let idx = heegner_index(&hp, p, &g).map_err(heegner_err)?;
    let generator = GeneratorSummary {
        source,
        height: rec
            .curve
            .canonical_height(&g, rec.height.prec())
            .map_err(|err| PipelineError::Computation(err.to_string()))?
            .to_decimal_string(HEIGHT_DIGITS),
        point: g,
        saturation,
        saturation_prime,
    };
    let index =
        IndexSummary { ratio: idx.ratio.to_decimal_string(HEIGHT_DIGITS), root: idx.root.to_string(), m0: idx.m0 };

    let local = e.bad_local_data().to_vec();
    let bounds = sha_bounds(idx.m0, &local, p).map_err(kolyvagin_err)?;
    let predicted: u32 = local.iter().map(|l| ord_p(l.tamagawa as i128, p)).sum();
    let primes = find_kolyvagin_primes(&e, d, p, config.sieve_bound).map_err(kolyvagin_err)?;

    let distribution = match primes.first() {
        _ if !config.distribution_check => None,
        None => {
            caveats.push(format!("no Kolyvagin prime up to {}; distribution relation not checked", config.sieve_bound));
            None
        }
        Some(kp) => Some(match verify_distribution(&setup, kp.l, config.precision_digits, config.qseries_max_terms) {
            Ok(c) => DistributionSummary {
                l: kp.l,
                a_l: Some(c.a_l),
                digits: c.digits,
                residual: Some(c.residual.to_decimal_string(6)),
                passed: c.passed(),
                error: None,
            },
            Err(err) => DistributionSummary {
                l: kp.l,
                a_l: None,
                digits: config.precision_digits,
                residual: None,
                passed: false,
                error: Some(err.to_string()),
            },
        }),
    };

    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        curve: CurveSummary {
            label: record.label.clone(),
            a: e.a().to_vec(),
            conductor: e.conductor().to_string(),
            discriminant: e.discriminant().to_string(),
            torsion_order: e.torsion_order(),
        },
        d,
        beta: setup.beta,
        class_number: setup.h,
        p,
        config: config.clone(),
        hypothesis_star: verdict,
        hypothesis_overridden: overridden,
        heegner,
        generator,
        index,
        m0: idx.m0,
        m_max: bounds.m_max,
        m_infinity_lower_bound: bounds.m_infinity_lower,
        conjectural_m_infinity: ConjecturalTarget {
            statement: "m_inf = sum_q ord_p(c_q)".into(),
            predicted_value: predicted,
            evaluated: false,
        },
        local_data: local,
        bounds,
        kolyvagin_primes: primes,
        distribution,
        caveats,
    })
}

/// Analyze each job against `table`, in parallel, results in job order.
pub fn analyze_batch(table: &Ingested, jobs: &[Job], config: &Config) -> Vec<Result<AnalysisReport, PipelineError>> {
    jobs.par_iter()
        .map(|j| {
            let rec = table
                .find(&j.label)
                .ok_or_else(|| PipelineError::Validation(format!("no curve labelled {:?}", j.label)))?;
            analyze(rec, j.d, j.p, config)
        })
        .collect()
}

/// Override a record's generator, e.g. from `--generator x_n/x_d,y_n/y_d`.
pub fn with_generator(record: &CurveRecord, g: &RationalPoint) -> Result<CurveRecord, PipelineError> {
    let (x, y) = match g {
        RationalPoint::Affine { x, y } => (x, y),
        RationalPoint::Infinity => return Err(PipelineError::Validation("generator is the point at infinity".into())),
    };
    let mut r = record.clone();
    r.generator = Some(vec![x.numer().clone(), x.denom().clone(), y.numer().clone(), y.denom().clone()]);
    r.validate()?;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec37() -> CurveRecord {
        serde_json::from_str(r#"{"label":"37a1","a":[0,0,1,-1,0],"generator":[0,1,0,1]}"#).unwrap()
    }

    fn quick() -> Config {
        Config { precision_digits: 30, sieve_bound: 2000, ..Config::default() }
    }

    #[test]
    fn rejects_bad_inputs() {
        let r = rec37();
        let c = quick();
        let code = |res: Result<AnalysisReport, PipelineError>| res.unwrap_err().exit_code();
        assert_eq!(code(analyze(&r, 7, 37, &c)), 2);
        assert_eq!(code(analyze(&r, 7, 9, &c)), 2);
        assert_eq!(code(analyze(&r, 7, 7, &c)), 2);
        assert_eq!(code(analyze(&r, 8, 5, &c)), 2);
        assert_eq!(code(analyze(&r, 3, 5, &c)), 2);
        let starved = Config { qseries_max_terms: 10, ..quick() };
        assert_eq!(code(analyze(&r, 7, 5, &starved)), 3);
    }

    #[test]
    fn generator_override() {
        let r = rec37();
        assert!(with_generator(&r, &RationalPoint::from_i64(1, 0)).is_ok());
        assert!(with_generator(&r, &RationalPoint::from_i64(1, 1)).is_err());
    }
}
