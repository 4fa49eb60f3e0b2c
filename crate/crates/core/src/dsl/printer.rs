use super::{Program, Stmt};

/// Canonical numeral: at most three decimals, trailing zeros trimmed.
pub fn format_number(value: f64) -> String {
    let mut s = format!("{value:.3}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

fn stmt_line(stmt: &Stmt) -> String {
    match stmt {
        Stmt::Scoop { bowl } => format!("obi.scoop_from_bowlno({bowl})"),
        Stmt::ScrapeThenScoop { bowl } => format!("obi.scrape_then_scoop_bowlno({bowl})"),
        Stmt::MoveToMouth => "obi.move_to_mouth()".into(),
        Stmt::Start => "obi.start()".into(),
        Stmt::Stop => "obi.stop()".into(),
        Stmt::PauseIndefinitely => "obi.pause_indefinitely()".into(),
        Stmt::SetVar { var, value } => format!("obi.{var} = {}", format_number(*value)),
        Stmt::Sleep { seconds } => format!("time.sleep({})", format_number(*seconds)),
    }
}

/// One statement per line, newline-joined, no trailing newline.
pub fn pretty_print(program: &Program) -> String {
    program
        .stmts
        .iter()
        .map(stmt_line)
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse, Var};
    use proptest::prelude::*;

    #[test]
    fn numerals() {
        assert_eq!(format_number(5.0), "5");
        assert_eq!(format_number(3.5), "3.5");
        assert_eq!(format_number(2.6667), "2.667");
        assert_eq!(format_number(0.1000), "0.1");
        assert_eq!(format_number(-0.0001), "0");
        assert_eq!(format_number(-1.25), "-1.25");
    }

    #[test]
    fn mouth_and_speed() {
        assert_eq!(
            pretty_print(&Program::new(vec![Stmt::MoveToMouth])),
            "obi.move_to_mouth()"
        );
        assert_eq!(
            pretty_print(&Program::new(vec![Stmt::SetVar {
                var: Var::Speed,
                value: 5.0
            }])),
            "obi.speed = 5"
        );
    }

    fn canonical_real() -> impl Strategy<Value = f64> {
        (-100_000i64..100_000).prop_map(|k| k as f64 / 1000.0)
    }

    fn arb_stmt() -> impl Strategy<Value = Stmt> {
        prop_oneof![
            (-10i64..10).prop_map(|bowl| Stmt::Scoop { bowl }),
            (-10i64..10).prop_map(|bowl| Stmt::ScrapeThenScoop { bowl }),
            Just(Stmt::MoveToMouth),
            Just(Stmt::Start),
            Just(Stmt::Stop),
            Just(Stmt::PauseIndefinitely),
            (prop::sample::select(Var::ALL.to_vec()), canonical_real())
                .prop_map(|(var, value)| Stmt::SetVar { var, value }),
            canonical_real().prop_map(|seconds| Stmt::Sleep { seconds }),
        ]
    }

    proptest! {
        #[test]
        fn parse_inverts_pretty_print(stmts in prop::collection::vec(arb_stmt(), 1..30)) {
            let program = Program::new(stmts);
            let text = pretty_print(&program);
            prop_assert_eq!(parse(&text).unwrap(), program);
        }
    }
}
