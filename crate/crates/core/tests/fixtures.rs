mod common;

use cde_core::analysis::{self, AnalysisError};
use cde_core::format::{self, FormatError};
use common::fixture;

fn read(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

#[test]
fn problem_fixtures_are_canonical() {
    for name in ["six_clients.problem.toml", "infeasible.problem.toml", "full.problem.toml"] {
        let text = read(name);
        let spec = format::parse_problem(&text).unwrap();
        assert_eq!(format::render_problem(&spec.problem, spec.field), text, "{name}");
    }
}

#[test]
fn matrix_fixtures_are_canonical() {
    let p = common::six_clients();
    for name in ["six_clients.matrix.toml", "six_clients_gf5.matrix.toml"] {
        let text = read(name);
        let e = format::parse_encoding(&text, &p).unwrap();
        assert_eq!(format::render_matrix(e.matrix()), text, "{name}");
    }
}

#[test]
fn fixture_analyses() {
    let infeasible = format::read_problem(&fixture("infeasible.problem.toml")).unwrap().problem;
    assert_eq!(analysis::diameter(&infeasible), Err(AnalysisError::Infeasible { client: 0 }));

    let full = format::read_problem(&fixture("full.problem.toml")).unwrap().problem;
    let report = analysis::analyze(&full, analysis::DEFAULT_DEGREE_BUDGET).unwrap();
    assert_eq!((report.rho, report.delta), (0, 2));
    assert_eq!(report.clients_missing_nothing, vec![0, 1, 2, 3]);
    assert_eq!(report.degree_bound.to_string(), "0");
}

#[test]
fn missing_file_is_an_io_error() {
    assert!(matches!(
        format::read_problem(&fixture("no-such-file.toml")),
        Err(FormatError::Io { .. })
    ));
}
