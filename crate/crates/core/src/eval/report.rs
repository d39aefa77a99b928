use std::fmt::Write as _;

use super::EvalError;
use crate::geom::PrimitiveClass;

/// Fitting errors are summed as integer picometres so that aggregation is
/// exact and order independent.
const PM_PER_M: f64 = 1e12;

/// Detection counts of one class (or of all classes).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassCounts {
    /// Predictions.
    pub n_p: usize,
    /// True instances.
    pub n_t: usize,
    /// Predictions with a matched instance.
    pub n_p2t: usize,
    /// Instances with a best match.
    pub n_t2p: usize,
    /// Summed fitting error over all matches, picometres.
    pub err_matched_pm: u128,
    /// Summed fitting error over best matches, picometres.
    pub err_best_pm: u128,
}

fn to_pm(metres: f64) -> u128 {
    if metres.is_finite() && metres > 0.0 { (metres * PM_PER_M).round() as u128 } else { 0 }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 { 0.0 } else { num as f64 / den as f64 }
}

impl ClassCounts {
    pub fn add_matched_error(&mut self, metres: f64) {
        self.err_matched_pm += to_pm(metres);
    }

    pub fn add_best_error(&mut self, metres: f64) {
        self.err_best_pm += to_pm(metres);
    }

    /// N_p2t / N_p, reported as 0 when there are no predictions.
    pub fn pap(&self) -> f64 {
        ratio(self.n_p2t, self.n_p)
    }

    /// N_t2p / N_t, 0 without true instances.
    pub fn par(&self) -> f64 {
        ratio(self.n_t2p, self.n_t)
    }

    /// N_t2p / N_p, 0 without predictions.
    pub fn hit_ratio(&self) -> f64 {
        ratio(self.n_t2p, self.n_p)
    }

    /// Set when PAP is undefined.
    pub fn no_predictions(&self) -> bool {
        self.n_p == 0
    }

    /// Mean fitting error over all matched predictions, centimetres.
    pub fn mean_error_matched_cm(&self) -> Option<f64> {
        (self.n_p2t > 0).then(|| self.err_matched_pm as f64 / PM_PER_M * 100.0 / self.n_p2t as f64)
    }

    /// Mean fitting error over best matches, centimetres.
    pub fn mean_error_best_cm(&self) -> Option<f64> {
        (self.n_t2p > 0).then(|| self.err_best_pm as f64 / PM_PER_M * 100.0 / self.n_t2p as f64)
    }

    fn add(&mut self, o: &ClassCounts) {
        self.n_p += o.n_p;
        self.n_t += o.n_t;
        self.n_p2t += o.n_p2t;
        self.n_t2p += o.n_t2p;
        self.err_matched_pm += o.err_matched_pm;
        self.err_best_pm += o.err_best_pm;
    }
}

/// Per-class detection counts; the ALL column is their sum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DetectionReport {
    /// Indexed by [`PrimitiveClass::index`].
    pub per_class: [ClassCounts; 4],
}

impl DetectionReport {
    pub fn class(&self, c: PrimitiveClass) -> &ClassCounts {
        &self.per_class[c.index()]
    }

    pub fn class_mut(&mut self, c: PrimitiveClass) -> &mut ClassCounts {
        &mut self.per_class[c.index()]
    }

    pub fn all(&self) -> ClassCounts {
        let mut t = ClassCounts::default();
        self.per_class.iter().for_each(|c| t.add(c));
        t
    }

    pub fn merge(&mut self, other: &DetectionReport) {
        for (a, b) in self.per_class.iter_mut().zip(&other.per_class) {
            a.add(b);
        }
    }
}

/// Sums per-scan reports over a test set.
pub fn aggregate_report<'a>(scans: impl IntoIterator<Item = &'a DetectionReport>) -> DetectionReport {
    let mut out = DetectionReport::default();
    scans.into_iter().for_each(|r| out.merge(r));
    out
}

fn rows(r: &DetectionReport) -> Vec<(&'static str, ClassCounts)> {
    let mut v: Vec<_> = PrimitiveClass::ALL.iter().map(|c| (c.short(), *r.class(*c))).collect();
    v.push(("ALL", r.all()));
    v
}

fn opt(v: Option<f64>, prec: usize) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.prec$}"))
}

/// Aligned plain-text table, one block per method.
pub fn format_report_table(methods: &[(&str, &DetectionReport)]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<12} {:<5} {:>7} {:>7} {:>7} {:>7} {:>6} {:>6} {:>8} {:>10} {:>10}",
        "method", "class", "Np", "Nt", "Np2t", "Nt2p", "PAP", "PAR", "Nt2p/Np", "err_m(cm)", "err_b(cm)"
    );
    for (name, r) in methods {
        for (label, c) in rows(r) {
            let flag = if c.no_predictions() { "*" } else { "" };
            let _ = writeln!(
                s,
                "{:<12} {:<5} {:>7} {:>7} {:>7} {:>7} {:>6} {:>6.3} {:>8.3} {:>10} {:>10}",
                name,
                label,
                c.n_p,
                c.n_t,
                c.n_p2t,
                c.n_t2p,
                format!("{:.3}{flag}", c.pap()),
                c.par(),
                c.hit_ratio(),
                opt(c.mean_error_matched_cm(), 3),
                opt(c.mean_error_best_cm(), 3),
            );
        }
    }
    if methods.iter().any(|(_, r)| rows(r).iter().any(|(_, c)| c.no_predictions())) {
        s.push_str("* no predictions; PAP reported as 0\n");
    }
    s
}

pub const CSV_HEADER: &str =
    "method,class,n_p,n_t,n_p2t,n_t2p,pap,par,nt2p_over_np,err_matched_cm,err_best_cm,err_matched_pm,err_best_pm,no_predictions";

/// Comma-separated rows (with header) for every method.
pub fn format_report_csv(methods: &[(&str, &DetectionReport)]) -> String {
    let mut s = String::new();
    s.push_str(CSV_HEADER);
    s.push('\n');
    for (name, r) in methods {
        for (label, c) in rows(r) {
            let _ = writeln!(
                s,
                "{name},{label},{},{},{},{},{:.6},{:.6},{:.6},{},{},{},{},{}",
                c.n_p,
                c.n_t,
                c.n_p2t,
                c.n_t2p,
                c.pap(),
                c.par(),
                c.hit_ratio(),
                opt(c.mean_error_matched_cm(), 6),
                opt(c.mean_error_best_cm(), 6),
                c.err_matched_pm,
                c.err_best_pm,
                c.no_predictions(),
            );
        }
    }
    s
}

/// Reads back the per-class rows written by [`format_report_csv`].
pub fn parse_report_csv(text: &str) -> Result<Vec<(String, DetectionReport)>, EvalError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(EvalError::Parse { line: 1, message: "missing or unexpected header".into() }),
    }
    let mut out: Vec<(String, DetectionReport)> = Vec::new();
    for (n, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |m: &str| EvalError::Parse { line: n + 1, message: m.to_string() };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != CSV_HEADER.split(',').count() {
            return Err(bad("wrong number of fields"));
        }
        if f[1] == "ALL" {
            continue;
        }
        let class = PrimitiveClass::ALL.into_iter().find(|c| c.short() == f[1]).ok_or_else(|| bad("unknown class"))?;
        let int = |i: usize| f[i].parse::<usize>().map_err(|_| bad("bad count"));
        let pm = |i: usize| f[i].parse::<u128>().map_err(|_| bad("bad error sum"));
        let counts = ClassCounts { n_p: int(2)?, n_t: int(3)?, n_p2t: int(4)?, n_t2p: int(5)?, err_matched_pm: pm(11)?, err_best_pm: pm(12)? };
        if out.last().is_none_or(|(m, _)| m != f[0]) {
            out.push((f[0].to_string(), DetectionReport::default()));
        }
        *out.last_mut().expect("pushed").1.class_mut(class) = counts;
    }
    Ok(out)
}
