use std::fmt::Write as _;

use super::study::{ConclusionReport, ModeOutcome};

fn num(v: f64) -> String {
    format!("{v:.6}")
}

/// Commas would break the table columns.
fn cell(s: &str) -> String {
    s.replace(',', ";")
}

impl ConclusionReport {
    /// The line-oriented report: `[section]` headers, `key = value` lines
    /// and comma-separated tables whose first line is the column header.
    pub fn render(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        let kv = |s: &mut String, k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(s, "{k} = {v}");
        };

        s.push_str("[study]\n");
        kv(&mut s, "dataset", &self.dataset_id);
        kv(&mut s, "classifier", &self.classifiers.join(";"));
        kv(&mut s, "n_total", &c.n_total);
        kv(&mut s, "tau", &format!("1/{}", c.n_total as f64 / 10.0));
        kv(&mut s, "epsilon", &c.epsilon);
        kv(&mut s, "ratio_cap", &c.ratio_cap);
        kv(&mut s, "criterion", &c.criterion);
        kv(&mut s, "loss", &c.loss);
        kv(&mut s, "selection", &c.selection);
        kv(&mut s, "ir_scale", &c.ir_scale);
        let grid: Vec<String> = c
            .tuple_grid
            .iter()
            .map(|g| {
                let rs: Vec<String> = g.ratios.iter().map(|r| r.to_string()).collect();
                format!("{}:{}", g.n_base, rs.join("/"))
            })
            .collect();
        kv(&mut s, "grid", &grid.join(" "));
        let modes: Vec<&str> = self.modes.iter().map(|m| m.mode.as_str()).collect();
        kv(&mut s, "modes", &modes.join(","));
        kv(&mut s, "partial", &self.partial);

        for m in &self.modes {
            let _ = writeln!(s, "\n[mode.{}]", m.mode);
            let fit = match &m.outcome {
                ModeOutcome::NotApplicable(why) => {
                    kv(&mut s, "status", &"n/a");
                    kv(&mut s, "reason", why);
                    continue;
                }
                ModeOutcome::Failed(why) => {
                    kv(&mut s, "status", &"failed");
                    kv(&mut s, "error", why);
                    continue;
                }
                ModeOutcome::Fitted(f) => f,
            };
            let law = &fit.law;
            kv(&mut s, "status", &"ok");
            kv(&mut s, "subset", &fit.slices[0].model.subset);
            kv(&mut s, "subset_admissible", &fit.subset_admissible);
            kv(&mut s, "c1", &num(law.c1));
            kv(&mut s, "c2", &num(law.c2));
            kv(&mut s, "law", law);
            kv(&mut s, "loss_value", &format!("{:.6e}", law.diagnostics.loss));
            kv(&mut s, "log_rmse", &num(law.diagnostics.log_rmse));
            kv(&mut s, "tuples", &fit.tuples.tuples.len());
            kv(&mut s, "discarded", &fit.tuples.discarded.len());
            kv(&mut s, "failed", &fit.tuples.failures.len());
            kv(&mut s, "zero_excluded", &law.diagnostics.n_zero_excluded);
            kv(&mut s, "extrapolated", &fit.extrapolated);
            let st = &law.diagnostics.starts[law.diagnostics.best_start];
            kv(
                &mut s,
                "best_start",
                &format!("c1 = {}, c2 = {}", st.c1_start, st.c2_start),
            );
            let converged = law.diagnostics.starts.iter().filter(|o| o.result.is_some()).count();
            kv(
                &mut s,
                "starts_converged",
                &format!("{converged}/{}", law.diagnostics.starts.len()),
            );

            let _ = writeln!(s, "\n[mode.{}.slices]", m.mode);
            s.push_str("n_base,points,subset,own_best,r2,adjusted_r2,rmse,intercept,coefficients\n");
            for sl in &fit.slices {
                let d = &sl.model.diagnostics;
                let coefs: Vec<String> = sl.model.coefficients.iter().map(|v| format!("{v:.6e}")).collect();
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{}",
                    sl.n_base,
                    sl.points,
                    sl.model.subset,
                    sl.own_best,
                    num(d.r2),
                    num(d.adjusted_r2),
                    num(d.rmse),
                    num(sl.model.intercept),
                    coefs.join(" ")
                );
            }

            let _ = writeln!(s, "\n[mode.{}.tuples]", m.mode);
            s.push_str("n_base,n_real_plus,n_syn_plus,real_ratio,syn_ratio,predicted_ratio\n");
            for t in &fit.tuples.tuples {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    t.n_base,
                    num(t.n_real_plus),
                    num(t.n_syn_plus),
                    num(t.real_ratio()),
                    num(t.syn_ratio()),
                    num(law.predict_ratio(t.n_base as f64, t.real_ratio()))
                );
            }
            let _ = writeln!(s, "\n[mode.{}.excluded]", m.mode);
            s.push_str("n_base,n_real_plus,reason\n");
            for d in &fit.tuples.discarded {
                let _ = writeln!(
                    s,
                    "{},{},discarded: target {:.4} above {:.4} at cap",
                    d.n_base,
                    num(d.n_real_plus),
                    d.target,
                    d.at_cap
                );
            }
            for f in &fit.tuples.failures {
                let _ = writeln!(s, "{},{},{}", f.n_base, num(f.n_real_plus), cell(&f.error.to_string()));
            }

            let _ = writeln!(s, "\n[mode.{}.contours]", m.mode);
            s.push_str("n_base,svg,csv,levels,polylines\n");
            for a in &fit.contours {
                let svg = match &a.svg {
                    Ok(_) => format!("{}.svg", a.stem()),
                    Err(e) => format!("none ({})", cell(e)),
                };
                let levels: Vec<String> = a.levels.iter().map(|l| format!("{l:.2}")).collect();
                let _ = writeln!(
                    s,
                    "{},{},{}.csv,{},{}",
                    a.n_base,
                    svg,
                    a.stem(),
                    levels.join(" "),
                    a.polylines
                );
            }
        }

        s.push_str("\n[checks]\n");
        for ch in &self.checks {
            kv(&mut s, ch.name, &format!("{} ({})", ch.status.as_str(), ch.evidence));
        }

        s.push_str("\n[ir]\n");
        kv(&mut s, "scale", &format!("1:{}", c.ir_scale));
        kv(
            &mut s,
            "scale_note",
            &"IR is defined at 1:1; other scales such as 1:4 are a different reading, selected with ir_scale",
        );
        s.push_str("n_base,baseline,acc_closed,acc_open,delta_closed,delta_open,ir\n");
        for row in &self.ir {
            match row {
                Ok(p) => {
                    let _ = writeln!(
                        s,
                        "{},{:.2},{:.2},{:.2},{:.2},{:.2},{}",
                        p.n_base,
                        p.baseline,
                        p.acc_closed,
                        p.acc_open,
                        p.delta_closed,
                        p.delta_open,
                        p.ir.map_or_else(|| "undefined".into(), |v| format!("{v:.4}"))
                    );
                }
                Err(e) => {
                    let _ = writeln!(s, "# {}", cell(e));
                }
            }
        }

        s.push_str("\n[epsilon_sensitivity]\n");
        s.push_str("epsilon,mode,subset,c1,c2,tuples,status\n");
        for row in &self.sensitivity {
            match &row.outcome {
                Ok((subset, law, n)) => {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},ok",
                        row.epsilon,
                        row.mode,
                        subset,
                        num(law.c1),
                        num(law.c2),
                        n
                    );
                }
                Err(e) => {
                    let _ = writeln!(s, "{},{},,,,,{}", row.epsilon, row.mode, cell(e));
                }
            }
        }
        s
    }

    /// Contour files as `(file name, contents)`, in report order.
    pub fn artifacts(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for m in &self.modes {
            if let ModeOutcome::Fitted(fit) = &m.outcome {
                for a in &fit.contours {
                    if let Ok(svg) = &a.svg {
                        out.push((format!("{}.svg", a.stem()), svg.clone()));
                    }
                    out.push((format!("{}.csv", a.stem()), a.csv.clone()));
                }
            }
        }
        out
    }
}
