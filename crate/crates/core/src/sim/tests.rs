use super::*;
use crate::fixtures;
use crate::symexpr::{parse_expr, SymbolTable};

fn system(name: &str) -> (ReducedSystem, Arena, NodeId) {
    let (arena, root) = fixtures::build(name).unwrap();
    let r = reduce::reduce(&arena, root).unwrap();
    (classify(&r.relations, &r.space).unwrap(), arena, root)
}

fn parse(t: &str) -> Expr {
    parse_expr(t, &SymbolTable::coordinates()).unwrap()
}

#[test]
fn classify_decay() {
    let (sys, ..) = system("decay");
    assert_eq!(sys.ode_rows[&0].to_string(), "-x_0");
    assert!(sys.algebraic_rows.is_empty());
    assert!(sys.controls.is_empty());
}

#[test]
fn classify_cavity() {
    let (sys, ..) = system("cavity");
    assert_eq!(sys.ode_rows.len(), 13);
    assert_eq!(sys.input_rows.len(), 1);
    assert_eq!(sys.input_rows[0].0, Sym::flow(0));
    assert_eq!(sys.controls, [Sym::effort(0)]);
}

#[test]
fn constraint_without_derivative_is_rejected() {
    let r = reduce::reduce(&fixtures::build("lc").unwrap().0, fixtures::build("lc").unwrap().1).unwrap();
    assert_eq!(classify(&[parse("x_0 + x_1")], &r.space).unwrap_err(), SimError::UndefinedState(0));
}

#[test]
fn binding_controls() {
    let (sys, ..) = system("rlc");
    assert!(bind_controls(&sys, &["sin(t)"]).is_ok());
    assert!(bind_controls(&sys, &["0"]).is_ok());
    assert!(matches!(bind_controls(&sys, &["x_0"]), Err(SimError::ControlNotTimeOnly { index: 0, .. })));
    assert!(matches!(bind_controls(&sys, &["1", "2"]), Err(SimError::ControlArity { expected: 1, found: 2 })));
    assert!(matches!(bind_controls(&sys, &["sin("]), Err(SimError::ControlSyntax { .. })));
}

#[test]
fn residual_values() {
    let (sys, ..) = system("decay");
    let sys = bind_controls(&sys, &[] as &[&str]).unwrap();
    assert_eq!(residual(&sys, 0.0, &[1.0], &[-1.0], &[]).unwrap(), [0.0]);
    assert_eq!(residual(&sys, 0.0, &[1.0], &[0.0], &[]).unwrap(), [1.0]);
    assert!(matches!(residual(&sys, 0.0, &[1.0, 2.0], &[0.0], &[]), Err(SimError::Dimension { .. })));
}

#[test]
fn cavity_residual_at_rest() {
    let (sys, ..) = system("cavity");
    let sys = bind_controls(&sys, &["0"]).unwrap();
    let r = residual(&sys, 0.0, &[0.0; 13], &[0.0; 13], &[]).unwrap();
    assert!(r.iter().all(|v| *v == 0.0));
}

#[test]
fn consistency_of_constraints() {
    let (arena, root) = fixtures::build("decay").unwrap();
    let space = reduce::reduce(&arena, root).unwrap().space;
    let sys = classify(&[parse("dx_0 + x_0"), parse("x_0 - 1")], &space).unwrap();
    let sys = bind_controls(&sys, &[] as &[&str]).unwrap();
    assert_eq!(consistent_ic(&sys, 0.0, &[1.0]).unwrap().1, 0.0);
    assert_eq!(consistent_ic(&sys, 0.0, &[2.0]).unwrap().1, 1.0);
    let (plain, ..) = system("decay");
    let plain = bind_controls(&plain, &[] as &[&str]).unwrap();
    assert_eq!(consistent_ic(&plain, 0.0, &[5.0]).unwrap().1, 0.0);
}

#[test]
fn decay_endpoint() {
    let (arena, root) = fixtures::build("decay").unwrap();
    let traj = simulate(&arena, root, &[1.0], (0.0, 1.0), 1e-3, &[] as &[&str]).unwrap();
    assert_eq!(traj.t.len(), 1001);
    assert_eq!(*traj.t.last().unwrap(), 1.0);
    assert!((traj.last_state()[0] - (-1.0f64).exp()).abs() < 1e-6);
}

#[test]
fn last_step_is_shortened() {
    let (arena, root) = fixtures::build("decay").unwrap();
    let traj = simulate(&arena, root, &[1.0], (0.0, 1.0), 0.3, &[] as &[&str]).unwrap();
    assert_eq!(traj.t.len(), 5);
    assert_eq!(traj.t[4], 1.0);
}

#[test]
fn bad_steps_and_spans() {
    let (arena, root) = fixtures::build("decay").unwrap();
    let none: &[&str] = &[];
    assert_eq!(simulate(&arena, root, &[1.0], (0.0, 1.0), 0.0, none).unwrap_err(), SimError::Step(0.0));
    assert!(matches!(simulate(&arena, root, &[1.0], (1.0, 1.0), 0.1, none), Err(SimError::Timespan { .. })));
    assert!(matches!(simulate(&arena, root, &[1.0, 0.0], (0.0, 1.0), 0.1, none), Err(SimError::Dimension { .. })));
}

#[test]
fn inconsistent_start_is_rejected() {
    let (arena, root) = fixtures::build("decay").unwrap();
    let space = reduce::reduce(&arena, root).unwrap().space;
    let sys = classify(&[parse("dx_0 + x_0"), parse("x_0 - 1")], &space).unwrap();
    let sys = bind_controls(&sys, &[] as &[&str]).unwrap();
    assert!(matches!(
        integrate(&sys, &[2.0], (0.0, 1.0), 0.1, &Settings::default()),
        Err(SimError::Inconsistent { row: 0, .. })
    ));
    assert!(matches!(
        integrate(&sys, &[1.0], (0.0, 1.0), 0.1, &Settings::default()),
        Err(SimError::NotSquare { equations: 2, unknowns: 1 })
    ));
}

#[test]
fn rlc_outputs_nothing_and_follows_forcing() {
    let (arena, root) = fixtures::build("rlc").unwrap();
    let traj = simulate(&arena, root, &[0.0, 0.0], (0.0, 1.0), 1e-2, &["1"]).unwrap();
    assert!(traj.output_names.is_empty());
    assert!(traj.last_state()[0] > 0.0);
}

#[test]
fn oscillator_reports_boundary() {
    let (arena, root) = fixtures::build("oscillator").unwrap();
    let traj = simulate(&arena, root, &[1.0, 0.0], (0.0, 0.1), 0.05, &["0"]).unwrap();
    assert_eq!(traj.output_names, [Sym::effort(0), Sym::flow(0)]);
    assert_eq!(traj.outputs[0], [0.0, 1.7]);
}

#[test]
fn energies() {
    let mut arena = Arena::new();
    let m = arena.new_composite("c").unwrap();
    let c = arena.insert(
        crate::components::new_atomic(crate::components::Kind::C, "C", crate::components::Value::Param(1.into()))
            .unwrap(),
    );
    arena.add(m, &[c]).unwrap();
    assert_eq!(stored_energy(&arena, m, &[2.0]).unwrap(), 2.0);
    let (lc, root) = fixtures::build("lc").unwrap();
    assert_eq!(stored_energy(&lc, root, &[1.0, 0.0]).unwrap(), 0.5);
    let (h, root) = fixtures::build("hamiltonian").unwrap();
    assert_eq!(stored_energy(&h, root, &[3.0, 4.0]).unwrap(), 12.5);
}

#[test]
fn batch_matches_single() {
    let (sys, ..) = system("lc");
    let sys = bind_controls(&sys, &[] as &[&str]).unwrap();
    let starts = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]];
    let seq = simulate_batch(Execution::Sequential, &sys, &starts, (0.0, 1.0), 0.01);
    let par = simulate_batch(Execution::Parallel, &sys, &starts, (0.0, 1.0), 0.01);
    assert_eq!(seq, par);
}
