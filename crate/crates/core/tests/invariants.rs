use num_rational::Ratio;
use proptest::prelude::*;

use voicepilot_core::dsl::{parse, validate, PauseConfig, Program, Stmt, Var, VariableSpec};
use voicepilot_core::numeric::clip;
use voicepilot_core::ExactVariableRange;

fn stmt() -> impl Strategy<Value = Stmt> {
    prop_oneof![
        (-2i64..6).prop_map(|bowl| Stmt::Scoop { bowl }),
        (-2i64..6).prop_map(|bowl| Stmt::ScrapeThenScoop { bowl }),
        Just(Stmt::MoveToMouth),
        Just(Stmt::MoveToMouth),
        Just(Stmt::Start),
        (0usize..3, -50i32..100).prop_map(|(v, x)| Stmt::SetVar {
            var: Var::ALL[v],
            value: x as f64 / 10.0,
        }),
        (0i32..80).prop_map(|s| Stmt::Sleep {
            seconds: s as f64 / 10.0
        }),
    ]
}

fn sleep_after_each_mouth(stmts: &[Stmt]) -> Vec<f64> {
    let mut gaps = Vec::new();
    for (i, s) in stmts.iter().enumerate() {
        if *s != Stmt::MoveToMouth {
            continue;
        }
        let mut slept = 0.0;
        for t in &stmts[i + 1..] {
            match t {
                Stmt::Sleep { seconds } => slept += seconds,
                t if t.is_bite() => {
                    gaps.push(slept);
                    break;
                }
                _ => {}
            }
        }
    }
    gaps
}

proptest! {
    #[test]
    fn clip_lands_in_range_and_is_idempotent(x in -1e6f64..1e6, lo in -10f64..10.0, w in 0.001f64..10.0) {
        let hi = lo + w;
        let c = clip(x, lo, hi).unwrap_or(x);
        prop_assert!(lo <= c && c <= hi);
        prop_assert!(clip(c, lo, hi).is_none());
    }

    #[test]
    fn exact_scaling_is_monotone(a in -5000i64..10000, b in -5000i64..10000) {
        let r = ExactVariableRange::new(
            (Ratio::from_integer(0), Ratio::from_integer(5)),
            (Ratio::new(1, 5), Ratio::from_integer(1)),
            Ratio::new(5, 2),
        ).unwrap();
        let (x, y) = (Ratio::new(a.min(b), 1000), Ratio::new(a.max(b), 1000));
        let cx = r.clip_grounded(x).unwrap_or(x);
        let cy = r.clip_grounded(y).unwrap_or(y);
        prop_assert!(r.scale(cx) <= r.scale(cy));
        prop_assert!(r.contains_native(r.scale(cx)));
    }

    #[test]
    fn accepted_programs_are_safe(stmts in prop::collection::vec(stmt(), 0..16), delay in 0u32..10) {
        let pause = PauseConfig { min_delay_s: delay as f64, ..PauseConfig::default() };
        let program = Program::new(stmts);
        let Ok((v, report)) = validate(&program, &VariableSpec::default(), &pause) else {
            let bad_bowl = program.stmts.iter().any(|s| {
                matches!(s, Stmt::Scoop { bowl } | Stmt::ScrapeThenScoop { bowl } if !(0..4).contains(bowl))
            });
            prop_assert!(bad_bowl);
            return Ok(());
        };
        for s in v.stmts() {
            if let Stmt::SetVar { value, .. } = s {
                prop_assert!((0.0..=5.0).contains(value));
            }
        }
        for gap in sleep_after_each_mouth(v.stmts()) {
            prop_assert!(gap >= pause.min_delay_s - 1e-9);
        }
        prop_assert_eq!(v.stmts().len(), program.len() + report.insertions.len());
    }

    #[test]
    fn validation_is_a_fixed_point(stmts in prop::collection::vec(stmt(), 1..16)) {
        let (spec, pause) = (VariableSpec::default(), PauseConfig::default());
        if let Ok((v, _)) = validate(&Program::new(stmts), &spec, &pause) {
            let reparsed = parse(&v.pretty()).unwrap();
            let (again, report) = validate(&reparsed, &spec, &pause).unwrap();
            prop_assert!(report.is_clean());
            prop_assert_eq!(again.stmts(), v.stmts());
        }
    }
}
