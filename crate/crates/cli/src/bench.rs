//! CSV timing harness over the bundled models. No thresholds are asserted.

use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use anyhow::Result;
use fedcheck::explgen::ExplGrammar;
use fedcheck::fed::Op;
use fedcheck::frontends::{
    parse_gpl_defs, parse_gpl_query, parse_pctl, GplChecker, PctlChecker, ReachProvider, RmcQuery,
};
use fedcheck::model::{parse_dtmc, parse_rmc, parse_rplts};
use fedcheck::symbol::Sym;
use fedcheck::{analyze, Analysis, EngineConfig};

const FIG1: &str = include_str!("../../core/models/fig1.dtmc");
const KY: &str = include_str!("../../core/models/knuth_yao.dtmc");
const LEADER: &str = include_str!("../../core/models/leader_N3K2.dtmc");
const FIG5: &str = include_str!("../../core/models/fig5.rmc");
const GPL_MODEL: &str = include_str!("../../core/models/gpl_demo.rplts");
const GPL_DEFS: &str = include_str!("../../core/models/gpl_demo.gpl");

pub const HEADER: &str = "query,productions,fed_nodes,merges,vars,probability,min_s,median_s,max_s";

type Job = Box<dyn Fn(&EngineConfig) -> fedcheck::Result<Analysis>>;

fn pctl(model: &'static str, formula: &'static str, state: &'static str) -> Job {
    Box::new(move |cfg| {
        let mut c = PctlChecker::new(Arc::new(parse_dtmc(model)?), *cfg);
        let (_, a) = c.check(&parse_pctl(formula)?, Sym::new(state))?;
        Ok(a.expect("pr-rooted formula"))
    })
}

fn jobs() -> Vec<(&'static str, Job)> {
    vec![
        (
            "fig1 reach s0 to s3",
            Box::new(|cfg| {
                let mut p = ReachProvider::new(Arc::new(parse_dtmc(FIG1)?));
                let g = p.goal(Sym::new("s0"), Sym::new("s3"))?;
                analyze(ExplGrammar::new(p), &[g], Op::Or, cfg)
            }),
        ),
        ("knuth_yao die_1", pctl(KY, "pr(until(tt,prop(die_1)),geq,0)", "s0")),
        (
            "leader elected",
            pctl(LEADER, "pr(until(tt,prop(elected)),geq,1)", "init"),
        ),
        (
            "gpl always_p at w",
            Box::new(|cfg| {
                let c = GplChecker::new(
                    Arc::new(parse_rplts(GPL_MODEL)?),
                    Arc::new(parse_gpl_defs(GPL_DEFS)?),
                    *cfg,
                );
                Ok(c.check(&parse_gpl_query("form(always_p)")?, Sym::new("w"))?.1)
            }),
        ),
        (
            "fig5 A exit 1",
            Box::new(|cfg| RmcQuery::new(Arc::new(parse_rmc(FIG5)?), *cfg)?.analyze(Sym::new("A"), None, 1)),
        ),
        (
            "fig5 B exit 2",
            Box::new(|cfg| RmcQuery::new(Arc::new(parse_rmc(FIG5)?), *cfg)?.analyze(Sym::new("B"), None, 2)),
        ),
    ]
}

pub fn run(cfg: &EngineConfig, repeat: usize, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "{HEADER}")?;
    for (name, job) in jobs() {
        let mut times = Vec::with_capacity(repeat);
        let mut last = None;
        for _ in 0..repeat {
            let t = Instant::now();
            let a = job(cfg)?;
            times.push(t.elapsed().as_secs_f64());
            last = Some(a);
        }
        times.sort_by(f64::total_cmp);
        let a = last.expect("at least one repetition");
        let c = a.counts();
        writeln!(
            out,
            "{name},{},{},{},{},{},{:.6},{:.6},{:.6}",
            c.productions,
            c.fed_nodes,
            c.merges,
            c.vars,
            a.probability,
            times[0],
            times[times.len() / 2],
            times[times.len() - 1]
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_row_per_query() {
        let mut buf = Vec::new();
        run(&EngineConfig::default(), 1, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], HEADER);
        assert_eq!(lines.len(), 1 + jobs().len());
        for l in &lines[1..] {
            assert_eq!(l.split(',').count(), HEADER.split(',').count(), "{l}");
        }
    }
}
