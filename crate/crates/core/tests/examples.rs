macro_rules! example {
    ($m:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $m {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }
    };
}

example!(canonicalize, "canonicalize.rs");
example!(symmetry_maps, "symmetry_maps.rs");
example!(orbit_equivalence, "orbit_equivalence.rs");
example!(commutant, "commutant.rs");
example!(truncated_series, "truncated_series.rs");
example!(rank_split, "rank_split.rs");
example!(file_formats, "file_formats.rs");
example!(selftest, "selftest.rs");

#[test]
fn canonicalize_runs() {
    canonicalize::run_example().unwrap();
}

#[test]
fn symmetry_maps_run() {
    symmetry_maps::run_example().unwrap();
}

#[test]
fn orbit_equivalence_runs() {
    orbit_equivalence::run_example().unwrap();
}

#[test]
fn commutant_runs() {
    commutant::run_example().unwrap();
}

#[test]
fn truncated_series_runs() {
    truncated_series::run_example().unwrap();
}

#[test]
fn rank_split_runs() {
    rank_split::run_example().unwrap();
}

#[test]
fn file_formats_run() {
    file_formats::run_example().unwrap();
}

#[test]
fn selftest_runs() {
    selftest::run_example().unwrap();
}
