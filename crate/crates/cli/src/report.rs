//! CSV and Markdown rendering of the analysis metrics.
//!
//! Reports list one row per image, sorted by name, plus a trailing mean
//! row. Missing metrics (no reference image, not a stego image) render as
//! empty cells; infinite PSNR renders as `inf`.

/// Metrics of one analyzed image. `None` means the metric was not
/// computable for this input.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricRecord {
    pub name: String,
    pub entropy: f64,
    pub mse: Option<f64>,
    pub psnr_db: Option<f64>,
    pub ssim: Option<f64>,
    pub corr_adjacent: Option<f64>,
    pub corr_vs_ref: Option<f64>,
    pub embedding_ratio_pct: Option<f64>,
    pub temporal_complexity: Option<f64>,
    /// Occlusion-attack PSNR per requested fraction, in request order.
    pub occlusion_psnr_db: Vec<f64>,
}

pub const BASE_COLUMNS: [&str; 9] = [
    "name",
    "entropy",
    "mse",
    "psnr_db",
    "ssim",
    "corr_adjacent",
    "corr_vs_ref",
    "embedding_ratio_pct",
    "temporal_complexity",
];

/// Four decimal places, `inf` for infinities.
pub fn format_metric(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.4}")
    }
}

fn format_opt(v: Option<f64>) -> String {
    v.map(format_metric).unwrap_or_default()
}

fn occlusion_headers(labels: &[String]) -> Vec<String> {
    labels
        .iter()
        .map(|l| format!("psnr_occluded_{l}"))
        .collect()
}

fn mean_record(records: &[MetricRecord]) -> MetricRecord {
    let mean_of = |values: Vec<f64>| -> Option<f64> {
        if values.is_empty() {
            None
        } else {
            Some(values.iter().sum::<f64>() / values.len() as f64)
        }
    };
    let column =
        |f: fn(&MetricRecord) -> Option<f64>| mean_of(records.iter().filter_map(f).collect());
    let occ_len = records.first().map_or(0, |r| r.occlusion_psnr_db.len());
    let occlusion_psnr_db = (0..occ_len)
        .map(|i| {
            let vals: Vec<f64> = records
                .iter()
                .filter_map(|r| r.occlusion_psnr_db.get(i).copied())
                .collect();
            vals.iter().sum::<f64>() / vals.len().max(1) as f64
        })
        .collect();
    MetricRecord {
        name: "mean".into(),
        entropy: records.iter().map(|r| r.entropy).sum::<f64>() / records.len().max(1) as f64,
        mse: column(|r| r.mse),
        psnr_db: column(|r| r.psnr_db),
        ssim: column(|r| r.ssim),
        corr_adjacent: column(|r| r.corr_adjacent),
        corr_vs_ref: column(|r| r.corr_vs_ref),
        embedding_ratio_pct: column(|r| r.embedding_ratio_pct),
        temporal_complexity: column(|r| r.temporal_complexity),
        occlusion_psnr_db,
    }
}

fn row_cells(r: &MetricRecord) -> Vec<String> {
    let mut cells = vec![
        r.name.clone(),
        format_metric(r.entropy),
        format_opt(r.mse),
        format_opt(r.psnr_db),
        format_opt(r.ssim),
        format_opt(r.corr_adjacent),
        format_opt(r.corr_vs_ref),
        format_opt(r.embedding_ratio_pct),
        format_opt(r.temporal_complexity),
    ];
    cells.extend(r.occlusion_psnr_db.iter().map(|&v| format_metric(v)));
    cells
}

/// CSV report with a trailing mean row.
pub fn render_csv(records: &[MetricRecord], occlusion_labels: &[String]) -> String {
    let mut header: Vec<String> = BASE_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend(occlusion_headers(occlusion_labels));
    let mut out = header.join(",");
    out.push('\n');
    for r in records.iter().chain(std::iter::once(&mean_record(records))) {
        out.push_str(&row_cells(r).join(","));
        out.push('\n');
    }
    out
}

/// Markdown table mirroring the CSV layout.
pub fn render_markdown(records: &[MetricRecord], occlusion_labels: &[String]) -> String {
    let mut header: Vec<String> = BASE_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend(occlusion_headers(occlusion_labels));
    let mut out = format!("| {} |\n", header.join(" | "));
    out.push_str(&format!("|{}\n", "---|".repeat(header.len())));
    for r in records.iter().chain(std::iter::once(&mean_record(records))) {
        out.push_str(&format!("| {} |\n", row_cells(r).join(" | ")));
    }
    out
}

/// LOWESS trend CSV: per-image temporal complexity and its smoothed value.
pub fn render_lowess_csv(names: &[String], values: &[f64], fitted: &[f64]) -> String {
    let mut out = String::from("index,name,temporal_complexity,lowess\n");
    for (i, name) in names.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            i + 1,
            name,
            format_metric(values[i]),
            format_metric(fitted[i])
        ));
    }
    out
}

/// Embedding-ratio comparison: the dynamic scheme's content-dependent
/// capacity against fixed k = 1..4 replacement, as percentages.
pub fn render_er_csv(rows: &[(String, f64, [f64; 4])]) -> String {
    let mut out = String::from("name,dynamic_k,k1,k2,k3,k4\n");
    for (name, dynamic, fixed) in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            name,
            format_metric(*dynamic),
            format_metric(fixed[0]),
            format_metric(fixed[1]),
            format_metric(fixed[2]),
            format_metric(fixed[3])
        ));
    }
    out
}
