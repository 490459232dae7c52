//! The mesh fixtures under `fixtures/` load, or fail, as labelled.

use std::path::PathBuf;

use overtwist::obj::read_obj;
use overtwist_core::dec::{one_form_laplacian, OperatorSet};
use overtwist_core::mesh::{topology, ConformalFactor};
use overtwist_core::spectral::harmonic_basis;
use overtwist_core::Error;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn core_error(e: anyhow::Error) -> Error {
    e.downcast_ref::<Error>().cloned().unwrap_or_else(|| panic!("not a core error: {e:#}"))
}

#[test]
fn genus_two_has_four_harmonic_forms() {
    let mesh = read_obj(&fixture("genus2.obj")).unwrap();
    assert_eq!(mesh.euler_characteristic(), -2);
    let topo = topology(&mesh).unwrap();
    assert_eq!(topo.genus, 2);
    let ops = OperatorSet::assemble(&mesh, &ConformalFactor::zero(mesh.num_vertices())).unwrap();
    assert_eq!(harmonic_basis(&one_form_laplacian(&ops), topo.genus).unwrap().len(), 4);
}

#[test]
fn open_square_is_rejected() {
    let err = core_error(read_obj(&fixture("open_square.obj")).unwrap_err());
    assert!(matches!(err, Error::OpenBoundary(..)), "{err:?}");
}

#[test]
fn flipped_octahedron_names_the_culprit_face() {
    let err = core_error(read_obj(&fixture("flipped_octahedron.obj")).unwrap_err());
    assert_eq!(err, Error::NonOrientable(7));
}
