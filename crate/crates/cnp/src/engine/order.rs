use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::net::{Arrow, ArrowOrder};

use super::env::Environment;
use super::options::ControlOptions;
use super::registry::PrimitiveRegistry;
use super::EngineError;

/// Orders and filters the arrows leaving a node according to the current
/// control options: ordering mode first, then the evaluation-range filter,
/// then truncation to `width`.
pub fn attempt_order<'a>(
    arrows: &[&'a Arrow],
    opts: &ControlOptions,
    env: &Environment,
    registry: &PrimitiveRegistry,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<&'a Arrow>, EngineError> {
    let needs_values = opts.order == ArrowOrder::Best || opts.range.is_some();
    let values: Vec<Option<f64>> = if needs_values {
        arrows
            .iter()
            .map(|arrow| evaluate(arrow, env, registry))
            .collect::<Result<_, _>>()?
    } else {
        vec![None; arrows.len()]
    };

    if needs_values {
        if let Some(pos) = values.iter().position(Option::is_none) {
            let a = arrows[pos];
            return Err(EngineError::Config(format!(
                "arrow `{} -> {}` has no evaluator but {} requires one",
                a.from,
                a.to,
                if opts.order == ArrowOrder::Best { "order=best" } else { "a range filter" },
            )));
        }
    }

    let mut ordered: Vec<(usize, &'a Arrow)> = arrows.iter().copied().enumerate().collect();
    match opts.order {
        ArrowOrder::Declared => {}
        ArrowOrder::Best => {
            // stable: ties keep declaration order
            ordered.sort_by(|(i, _), (j, _)| {
                values[*i].unwrap().total_cmp(&values[*j].unwrap())
            });
        }
        ArrowOrder::Random => ordered.shuffle(rng),
    }

    let mut result: Vec<&'a Arrow> = Vec::with_capacity(ordered.len());
    for (i, arrow) in ordered {
        if let Some((lo, hi)) = opts.range {
            let v = values[i].unwrap();
            if v < lo || v > hi {
                continue;
            }
        }
        result.push(arrow);
        if let Some(width) = opts.width {
            if result.len() as u64 >= width {
                break;
            }
        }
    }
    Ok(result)
}

fn evaluate(
    arrow: &Arrow,
    env: &Environment,
    registry: &PrimitiveRegistry,
) -> Result<Option<f64>, EngineError> {
    let Some(name) = &arrow.eval else {
        return Ok(None);
    };
    let eval = registry
        .evaluator(name)
        .ok_or_else(|| EngineError::UnregisteredEvaluator(name.clone()))?;
    let v = eval(env, arrow).map_err(|e| EngineError::PrimitiveAbort {
        name: name.clone(),
        message: e.0,
    })?;
    Ok(Some(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::ArrowOrder;
    use rand::SeedableRng;

    fn arrow(to: &str, eval: Option<&str>) -> Arrow {
        Arrow {
            from: "n".into(),
            to: to.into(),
            chain: vec![],
            eval: eval.map(str::to_string),
        }
    }

    fn fixture() -> (Vec<Arrow>, PrimitiveRegistry) {
        // evaluator values keyed by target: a=5, b=2, c=9
        let arrows = vec![
            arrow("a", Some("v")),
            arrow("b", Some("v")),
            arrow("c", Some("v")),
        ];
        let mut reg = PrimitiveRegistry::new();
        reg.register_evaluator("v", |_, arrow| {
            Ok(match arrow.to.as_str() {
                "a" => 5.0,
                "b" => 2.0,
                _ => 9.0,
            })
        })
        .unwrap();
        (arrows, reg)
    }

    fn run(arrows: &[Arrow], opts: &ControlOptions, reg: &PrimitiveRegistry) -> Vec<String> {
        let refs: Vec<&Arrow> = arrows.iter().collect();
        let env = Environment::default();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        attempt_order(&refs, opts, &env, reg, &mut rng)
            .unwrap()
            .iter()
            .map(|a| a.to.clone())
            .collect()
    }

    #[test]
    fn best_orders_ascending_by_value() {
        let (arrows, reg) = fixture();
        let opts = ControlOptions { order: ArrowOrder::Best, ..Default::default() };
        assert_eq!(run(&arrows, &opts, &reg), ["b", "a", "c"]);
    }

    #[test]
    fn range_filters_out_of_interval() {
        let (arrows, reg) = fixture();
        let opts = ControlOptions { range: Some((1.0, 6.0)), ..Default::default() };
        assert_eq!(run(&arrows, &opts, &reg), ["a", "b"]);
    }

    #[test]
    fn best_with_width_one_is_greedy() {
        let (arrows, reg) = fixture();
        let opts = ControlOptions {
            order: ArrowOrder::Best,
            width: Some(1),
            ..Default::default()
        };
        assert_eq!(run(&arrows, &opts, &reg), ["b"]);
    }

    #[test]
    fn declared_keeps_input_order() {
        let (arrows, reg) = fixture();
        let opts = ControlOptions::default();
        assert_eq!(run(&arrows, &opts, &reg), ["a", "b", "c"]);
    }

    #[test]
    fn random_is_seed_deterministic() {
        let (arrows, reg) = fixture();
        let opts = ControlOptions { order: ArrowOrder::Random, seed: 7, ..Default::default() };
        let once = run(&arrows, &opts, &reg);
        assert_eq!(once, run(&arrows, &opts, &reg));
        let mut seen = std::collections::HashSet::new();
        for seed in 0..16 {
            let opts = ControlOptions { order: ArrowOrder::Random, seed, ..Default::default() };
            seen.insert(run(&arrows, &opts, &reg));
        }
        assert!(seen.len() > 1, "shuffle should depend on the seed");
    }

    #[test]
    fn best_without_evaluator_is_config_error() {
        let (mut arrows, reg) = fixture();
        arrows[1].eval = None;
        let refs: Vec<&Arrow> = arrows.iter().collect();
        let opts = ControlOptions { order: ArrowOrder::Best, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err =
            attempt_order(&refs, &opts, &Environment::default(), &reg, &mut rng).unwrap_err();
        match err {
            EngineError::Config(msg) => assert!(msg.contains("`n -> b`")),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn missing_evaluator_passes_without_range() {
        let (mut arrows, reg) = fixture();
        arrows[1].eval = None;
        let refs: Vec<&Arrow> = arrows.iter().collect();
        let opts = ControlOptions::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = attempt_order(&refs, &opts, &Environment::default(), &reg, &mut rng).unwrap();
        assert_eq!(out.len(), 3);
    }
}
