use pcf_core::calibration::infer_force;
use pcf_sim::calibrate::{fit_family, force_table};
use pcf_sim::config::{ConfigKind, ExperimentConfig, Grid};
use pcf_sim::diagram::{
    diagram_scene, render, BLOCKER_COLOR, BOUNDARY_COLOR, EMITTER_COLOR, RECEIVER_COLOR,
    TARGET_COLOR,
};
use pcf_sim::formats::{
    read_fits, read_force_table, write_fits, write_force_table, FIT_HEADER, FORCE_TABLE_HEADER,
};
use pcf_sim::optimize::{write_trace, TRACE_HEADER};
use pcf_sim::pipeline::{run_full_pipeline, write_report};
use pcf_sim::sweep::{read_rows, rows_to_string, run_force_sweep};

fn small() -> ExperimentConfig {
    let mut config = ExperimentConfig::default();
    config.fit.distance = Grid::new(18.0, 50.0, 17);
    config.pipeline.table_points = 11;
    config
}

fn diagram(kind: ConfigKind, target: bool) -> String {
    let mut config = ExperimentConfig::default();
    config.diagram.config = kind;
    config.diagram.target = target;
    render(&diagram_scene(&config).unwrap(), false).unwrap()
}

fn strokes<'a>(doc: &'a roxmltree::Document) -> Vec<&'a str> {
    doc.descendants()
        .filter_map(|n| n.attribute("stroke"))
        .collect()
}

#[test]
fn diagram_has_a_millimeter_grid() {
    let svg = diagram(ConfigKind::Arc, true);
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let grid = doc
        .descendants()
        .find(|n| n.attribute("id") == Some("grid"))
        .unwrap();
    let mut xs: Vec<f64> = grid
        .children()
        .filter(|n| n.is_element() && n.attribute("x1") == n.attribute("x2"))
        .map(|n| n.attribute("x1").unwrap().parse().unwrap())
        .collect();
    xs.sort_by(f64::total_cmp);
    assert!(xs.len() > 10);
    for w in xs.windows(2) {
        assert!((w[1] - w[0] - 1.0).abs() < 1e-9);
    }
    let root = doc.root_element();
    assert!(root.attribute("width").unwrap().ends_with("mm"));
}

#[test]
fn diagram_colors_each_part() {
    let svg = diagram(ConfigKind::Blocker, true);
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let colors = strokes(&doc);
    for c in [
        EMITTER_COLOR,
        RECEIVER_COLOR,
        BOUNDARY_COLOR,
        BLOCKER_COLOR,
        TARGET_COLOR,
    ] {
        assert!(colors.contains(&c), "missing {c}");
    }
    let by_id = |id: &str| {
        doc.descendants()
            .find(|n| n.attribute("id") == Some(id))
            .and_then(|n| n.attribute("stroke"))
    };
    assert_eq!(by_id("emitter"), Some(EMITTER_COLOR));
    assert_eq!(by_id("receiver"), Some(RECEIVER_COLOR));
    assert_eq!(by_id("target"), Some(TARGET_COLOR));
}

#[test]
fn ray_opacity_tracks_power() {
    let svg = diagram(ConfigKind::Flat, false);
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let rays = doc
        .descendants()
        .find(|n| n.attribute("id") == Some("rays"))
        .unwrap();
    let opacity: Vec<f64> = rays
        .children()
        .filter_map(|n| n.attribute("stroke-opacity"))
        .map(|v| v.parse().unwrap())
        .collect();
    assert!(!opacity.is_empty());
    assert!(opacity.iter().all(|o| (0.0..=1.0).contains(o)));
    assert_eq!(opacity.iter().cloned().fold(0.0, f64::max), 1.0);
    // Fresnel reflections off the flat boundary are a few percent of the
    // emitted rays.
    assert!(opacity.iter().any(|&o| o > 0.0 && o < 0.1));
}

#[test]
fn reflected_only_diagram_drops_direct_rays() {
    let config = ExperimentConfig::default();
    let scene = diagram_scene(&config).unwrap();
    let all = render(&scene, false).unwrap();
    let reflected = render(&scene, true).unwrap();
    assert!(reflected.matches("<polyline").count() < all.matches("<polyline").count());
}

#[test]
fn csv_round_trip_and_determinism() {
    let mut config = ExperimentConfig::default();
    config.sweep.depth = Grid::new(0.0, 5.0, 3);
    let rows = run_force_sweep(&config).unwrap();
    let text = rows_to_string(&rows);
    assert_eq!(text, rows_to_string(&run_force_sweep(&config).unwrap()));
    let back = read_rows(&text).unwrap();
    assert_eq!(back.len(), rows.len());
    for (a, b) in rows.iter().zip(&back) {
        assert_eq!(a.intensity, b.intensity);
        assert_eq!(a.range, b.range);
    }
    // The blocker's return is blocked at contact, which is written as NaN.
    assert!(text
        .lines()
        .any(|l| l.starts_with("blocker,") && l.contains(",NaN,")));
}

#[test]
fn fit_and_table_files_round_trip() {
    let config = small();
    let family = fit_family(&config).unwrap();
    let text = write_fits(&family);
    assert_eq!(text.lines().next(), Some(FIT_HEADER));
    assert!(text.contains("\nmembers=3\n"));
    let back = read_fits(&text).unwrap();
    assert_eq!(back.config, family.config);
    for (a, b) in family.members.iter().zip(&back.members) {
        assert_eq!(a.reflectivity, b.reflectivity);
        assert_eq!(a.fit.params, b.fit.params);
        assert_eq!(a.fit.converged, b.fit.converged);
    }

    let table = force_table(&config, 0.5).unwrap();
    let text = write_force_table(&table);
    assert_eq!(text.lines().next(), Some(FORCE_TABLE_HEADER));
    let back = read_force_table(&text).unwrap();
    assert_eq!(back, table);
    for k in back.knots() {
        assert!((infer_force(&back, k.intensity).force - k.force).abs() < 1e-9);
    }
    assert!(read_force_table("pcf-force-table v1\nreflectivity=0.5\n").is_err());
}

#[test]
fn optimization_trace_has_its_columns() {
    let mut config = ExperimentConfig::default();
    config.optimize.grid = 3;
    config.optimize.sweeps = 0;
    let result = pcf_sim::optimize::run_optimize(&config).unwrap();
    let mut buf = Vec::new();
    write_trace(&mut buf, &result.trace).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.lines().any(|l| l == TRACE_HEADER.join(",")));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 3);
}

#[test]
fn black_target_reports_no_signal() {
    let mut config = small();
    config.pipeline.reflectivity = 0.0;
    let report = run_full_pipeline(&config).unwrap();
    assert!(report.no_signal || report.approach.iter().all(|r| r.intensity == r.crosstalk));
    let text = write_report(&report);
    assert!(text.contains("reflectivity status=failed"), "{text}");
}

#[test]
fn pipeline_recovers_a_dark_target() {
    let mut config = small();
    config.pipeline.reflectivity = 0.17;
    let report = run_full_pipeline(&config).unwrap();
    let rho = report.reflectivity.as_ref().unwrap().reflectivity;
    assert!((rho - 0.17).abs() < 0.05, "{rho}");
    assert!(report.forces.iter().all(|f| f.relative_error() < 0.1));
}
