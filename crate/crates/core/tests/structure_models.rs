use qms_core::lindblad::{build_schrodinger_generator, Superoperator};
use qms_core::models::{build_generic_qms, build_k_photon, build_two_photon, diagonal_block_defect, KPhotonParams, TwoPhotonParams};
use qms_core::numerics::{ComplexMatrix, Tolerances};
use qms_core::operators::Subspace;
use qms_core::classical::BirthDeathChain;
use qms_core::structure::{
    absorption_operator, check_ergodic, is_enclosure, is_gas, minimal_enclosures, positive_recurrent_subspace,
    rate_certificate, transient_split, GASReason, TimeMode,
};

fn two_photon(lambda: f64, omega: f64, dim: usize) -> Superoperator {
    let p = TwoPhotonParams { lambda, mu: 1.0, omega, dim };
    build_schrodinger_generator(&build_two_photon(&p).unwrap()).unwrap()
}

#[test]
fn lambda_zero_recurrent_and_transient_parts() {
    let tol = Tolerances::default();
    let gen = two_photon(0.0, 2.0, 20);
    let split = transient_split(&gen, &tol).unwrap();
    assert_eq!(split.r_plus.coordinate_indices(), Some(vec![0, 1]));
    assert_eq!(split.transient.coordinate_indices(), Some((2..20).collect()));
    assert!(split.transient_decay_ok);

    let a = absorption_operator(&gen, &split.r_plus, &tol).unwrap();
    assert!(a.is_enclosure && a.monotone_ok && a.sandwich_ok);
    assert!((a.operator.matrix() - &ComplexMatrix::identity(20)).norm_spectral() < 1e-8);
}

#[test]
fn lambda_zero_rate_sweep_finds_contraction() {
    let tol = Tolerances::default();
    let gen = two_photon(0.0, 2.0, 12);
    let cert = rate_certificate(&gen, Some(&[0.1, 0.5, 1.0, 2.0]), &tol).unwrap();
    assert!(cert.valid);
    assert!(cert.kappa < 1.0);
    assert!(cert.max_excess <= 1e-7);
}

#[test]
fn lambda_positive_has_no_transient_part_and_two_alpha_blocks() {
    let tol = Tolerances::default();
    let gen = two_photon(0.5, 1.0, 12);
    let split = transient_split(&gen, &tol).unwrap();
    assert!(split.r_plus.is_full() && split.transient.is_zero());
    let dec = minimal_enclosures(&gen, 11, &tol).unwrap();
    assert_eq!(dec.alpha_blocks.len(), 2);
    assert!(dec.beta_blocks.is_empty());
    assert_eq!(dec.alpha_blocks[0].coordinate_indices(), Some((0..12).step_by(2).collect()));
    assert_eq!(dec.alpha_blocks[1].coordinate_indices(), Some((1..12).step_by(2).collect()));

    for block in &dec.alpha_blocks {
        let v = is_gas(&gen, block, TimeMode::default(), &tol).unwrap();
        assert!(!v.is_gas);
        assert_eq!(v.reason, GASReason::Neither);
    }
    let all = is_gas(&gen, &split.r_plus, TimeMode::Continuous, &tol).unwrap();
    assert!(all.is_gas);
}

#[test]
fn k_photon_recurrent_space_is_kernel_of_jump() {
    let tol = Tolerances::default();
    let m = build_k_photon(&KPhotonParams { k: 2, alpha: 1.0, dim: 25 }).unwrap();
    let gen = build_schrodinger_generator(&m.spec).unwrap();
    let rp = positive_recurrent_subspace(&gen, &tol).unwrap();
    let kernel = Subspace::span(gen.space(), &m.kernel_basis, &tol).unwrap();
    assert_eq!(rp.dim(), 2);
    assert!(rp.max_principal_angle(&kernel).unwrap() < 1e-5);
    assert!(is_enclosure(&gen, &rp).unwrap());
    assert!(check_ergodic(&gen, &tol).unwrap().attractive);
}

#[test]
fn generic_qms_keeps_diagonal_and_coherences_apart() {
    let chain = BirthDeathChain::constant(1.0, 2.0, 100).unwrap();
    let qms = build_generic_qms(&chain.to_generic_params(8)).unwrap();
    let gen = build_schrodinger_generator(&qms.spec).unwrap();
    assert!(diagonal_block_defect(&gen) < 1e-14);
}
