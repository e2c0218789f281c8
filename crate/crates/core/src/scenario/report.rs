use std::fmt::Write;

use super::engine::RunOutcome;
use crate::gate::CrossCheck;

pub(crate) fn render(out: &RunOutcome) -> String {
    let sc = out.scenario();
    let mut s = String::new();
    let _ = writeln!(s, "# Scenario `{}`\n", sc.name);
    if !sc.description.is_empty() {
        let _ = writeln!(s, "{}\n", sc.description);
    }
    let passed = out.assertions.iter().filter(|a| a.passed).count();
    let _ = writeln!(
        s,
        "Seed {}, {} events, {} log records. Assertions: {passed}/{} passed.\n",
        sc.seed,
        sc.timeline.len(),
        out.log.lines.len(),
        out.assertions.len()
    );

    let _ = writeln!(s, "## Nodes\n");
    let _ = writeln!(s, "| node | role | entries | blocks | head | tracks |");
    let _ = writeln!(s, "|---|---|---|---|---|---|");
    for n in &out.nodes {
        let tracks = out.pictures.get(&n.spec.id).map_or(0, |p| p.tracks.len());
        let head = n.ledger.head().map_or("-".into(), |h| h.short());
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | `{head}` | {tracks} |",
            n.spec.id,
            n.spec.role,
            n.ledger.entry_count(),
            n.ledger.chain().len()
        );
    }

    if let Some(node) = out.report_node() {
        if let Some(p) = out.pictures.get(node) {
            let _ = writeln!(s, "\n## Picture at {node}\n");
            if p.tracks.is_empty() {
                let _ = writeln!(s, "No tracks.");
            } else {
                let _ = writeln!(s, "| track | kind | label | location | E | u | status | sources |");
                let _ = writeln!(s, "|---|---|---|---|---|---|---|---|");
                for t in &p.tracks {
                    let [lat, lon] = t.position();
                    let _ = writeln!(
                        s,
                        "| {} | {:?} | {} | {lat:.5}, {lon:.5} | {:.3} | {:.3} | {:?} | {} |",
                        t.track_id,
                        t.kind,
                        t.label,
                        t.expected,
                        t.opinion.uncertainty,
                        t.status,
                        t.contributing.len()
                    );
                }
            }
        }
    }

    if !out.route_queries.is_empty() {
        let _ = writeln!(s, "\n## Route assessments\n");
        for (label, a) in &out.route_queries {
            let _ = writeln!(s, "`{label}` (lambda {} km), chosen **{}**:\n", a.lambda_km, a.chosen);
            for r in &a.routes {
                let _ = writeln!(s, "- {}: risk {:.6}", r.route_id, r.risk);
            }
            let _ = writeln!(s);
        }
    }

    if !out.percepts.is_empty() {
        let _ = writeln!(s, "\n## Gate\n");
        for (label, p) in &out.percepts {
            let verdict = match &p.check {
                CrossCheck::Consistent => "consistent".to_owned(),
                CrossCheck::Conflict { reasons, .. } => {
                    let codes: Vec<String> = reasons.iter().map(|r| format!("{:?} ({})", r.code, r.detail)).collect();
                    format!("conflict: {}", codes.join("; "))
                }
            };
            let evidence = p.evidence.map_or(String::new(), |d| format!(", evidence `{}`", d.short()));
            let _ = writeln!(s, "- `{label}` at {}: machine {:?}; {verdict}{evidence}", p.node, p.machine.assessment);
        }
        for (percept, c) in &out.engagements {
            let _ = writeln!(
                s,
                "- engagement on `{percept}`: truth {:?}, operator {:?}, machine {:?} -> {} ({}){}",
                c.truth,
                c.operator.assessment,
                c.machine.assessment,
                c.state,
                c.consequence,
                if c.engaged { ", ENGAGED" } else { "" }
            );
        }
    }

    let _ = writeln!(s, "\n## Assertions\n");
    if out.assertions.is_empty() {
        let _ = writeln!(s, "None declared.");
    }
    for a in &out.assertions {
        let _ = writeln!(s, "- [{}] {}: {}", if a.passed { "pass" } else { "FAIL" }, a.description, a.detail);
    }
    s
}
