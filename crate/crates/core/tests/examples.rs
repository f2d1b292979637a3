mod scheduler_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scheduler.rs"));
}

mod conjugation_maps_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/conjugation_maps.rs"));
}

mod partitions_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/partitions.rs"));
}

mod analytic_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/analytic_approx.rs"));
}

mod isometry_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/isometry_and_norms.rs"));
}

mod distribution_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/distribution.rs"));
}

mod mixing_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/mixing.rs"));
}

mod cli_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/cli_pipeline.rs"));
}

#[test]
fn scheduler_example_runs() {
    scheduler_example::run_example().expect("scheduler example should run");
}

#[test]
fn conjugation_maps_example_runs() {
    conjugation_maps_example::run_example().expect("conjugation maps example should run");
}

#[test]
fn partitions_example_runs() {
    partitions_example::run_example().expect("partitions example should run");
}

#[test]
fn analytic_example_runs() {
    analytic_example::run_example().expect("analytic example should run");
}

#[test]
fn isometry_example_runs() {
    isometry_example::run_example().expect("isometry example should run");
}

#[test]
fn distribution_example_runs() {
    distribution_example::run_example().expect("distribution example should run");
}

#[test]
fn mixing_example_runs() {
    mixing_example::run_example().expect("mixing example should run");
}

#[test]
fn cli_example_runs() {
    cli_example::run_example().expect("cli example should run");
}
