import types

import numpy as np
import pytest

from pathbank.mesh import TriMesh
from pathbank.procedural import box_mesh, plate
from pathbank.se3 import Rotation
from pathbank.shape import (CorrespondenceSet, ShapeDescriptor,
                            correspondences, descriptor, select_template,
                            similarity)


def _asymmetric_mesh(seed=71):
    """A box with distinct extents and a deterministic jitter so no two
    vertices are related by any symmetry. Exact-invariance tests need this:
    a symmetric mesh has several equally good canonical orientations, and
    which one wins can legitimately change under rotation."""
    rng = np.random.default_rng(seed)
    base = box_mesh((2.0, 1.3, 0.7))
    verts = np.asarray(base.vertices) + rng.normal(scale=0.03, size=(8, 3))
    return TriMesh(verts, base.triangles)


def _rotated(mesh, axis, angle):
    rot = Rotation.from_axis_angle(axis, angle).matrix()
    return TriMesh(np.asarray(mesh.vertices) @ rot.T, mesh.triangles)


def _scaled(mesh, s):
    return TriMesh(np.asarray(mesh.vertices) * s, mesh.triangles)


# --- descriptor ---

def test_descriptor_is_a_distribution():
    d = descriptor(_asymmetric_mesh())
    assert d.bins.shape == (64,)
    assert (d.bins >= 0).all()
    assert np.isclose(d.bins.sum(), 1.0, atol=1e-12)


def test_descriptor_deterministic():
    mesh = _asymmetric_mesh()
    a = descriptor(mesh)
    b = descriptor(mesh)
    np.testing.assert_array_equal(a.bins, b.bins)


def test_descriptor_seed_changes_samples():
    mesh = _asymmetric_mesh()
    assert similarity(descriptor(mesh, seed=0), descriptor(mesh, seed=1)) > 0.0


def test_descriptor_power_of_two_scale_is_exact():
    """Halving/doubling coordinates scales every pairwise distance exactly
    (power-of-two multiplication is lossless), so the normalized histogram
    is bit-identical."""
    mesh = _asymmetric_mesh()
    base = descriptor(mesh)
    for s in (0.5, 2.0):
        np.testing.assert_array_equal(descriptor(_scaled(mesh, s)).bins,
                                      base.bins)


def test_descriptor_rotation_invariance():
    mesh = _asymmetric_mesh()
    base = descriptor(mesh)
    rot = descriptor(_rotated(mesh, [0, 0, 1], 0.7))
    # distances are preserved up to rounding; at worst a few samples hop bins
    assert similarity(base, rot) < 0.01


def test_descriptor_separates_shapes():
    cube = descriptor(box_mesh((1.0, 1.0, 1.0)))
    slab = descriptor(plate(3.0, 3.0, 0.2))
    assert similarity(cube, slab) > 0.05


def test_descriptor_rejects_bad_pair_count():
    with pytest.raises(ValueError):
        descriptor(_asymmetric_mesh(), n_pairs=0)


def test_shape_descriptor_validates():
    with pytest.raises(ValueError):
        ShapeDescriptor(np.ones(64))  # sums to 64, not 1
    with pytest.raises(ValueError):
        ShapeDescriptor(np.full((2, 32), 1 / 64))


def test_similarity_properties():
    a = descriptor(_asymmetric_mesh())
    b = descriptor(box_mesh((1.0, 1.0, 1.0)))
    assert similarity(a, a) == 0.0
    assert similarity(a, b) == similarity(b, a) > 0.0


def test_similarity_rejects_mismatched_bins():
    a = ShapeDescriptor(np.full(64, 1 / 64))
    b = ShapeDescriptor(np.full(32, 1 / 32))
    with pytest.raises(ValueError):
        similarity(a, b)


# --- correspondences ---

def test_correspondences_shape_and_range():
    query = _asymmetric_mesh()
    template = box_mesh((2.0, 1.3, 0.7))
    c = correspondences(query, template, l=8)
    assert len(c) == 8
    assert c.pairs.shape == (8, 2)
    assert (c.pairs[:, 0] >= 0).all() and (c.pairs[:, 0] < 8).all()
    assert (c.pairs[:, 1] >= 0).all() and (c.pairs[:, 1] < 8).all()
    assert not c.pca_degenerate


def test_correspondences_deterministic():
    query = _asymmetric_mesh()
    template = box_mesh((2.0, 1.3, 0.7))
    a = correspondences(query, template)
    b = correspondences(query, template)
    np.testing.assert_array_equal(a.pairs, b.pairs)


def test_correspondences_invariant_to_template_rotation():
    query = _asymmetric_mesh(seed=71)
    template = _asymmetric_mesh(seed=72)
    base = correspondences(query, template)
    for axis, angle in (([1, 0, 0], -np.pi / 4), ([0, 1, 0], np.pi / 4),
                        ([0.3, 0.5, 1.0], 2.0)):
        rotated = correspondences(query, _rotated(template, axis, angle))
        np.testing.assert_array_equal(rotated.pairs, base.pairs)


def test_correspondences_invariant_to_query_rotation_and_scale():
    query = _asymmetric_mesh(seed=71)
    template = _asymmetric_mesh(seed=72)
    base = correspondences(query, template)
    moved = correspondences(_scaled(_rotated(query, [0, 1, 1], 1.1), 2.0),
                            template)
    np.testing.assert_array_equal(moved.pairs, base.pairs)


def test_correspondences_flag_degenerate_pca():
    cube = box_mesh((1.0, 1.0, 1.0))  # isotropic covariance
    c = correspondences(cube, _asymmetric_mesh())
    assert c.pca_degenerate


def test_correspondences_need_three():
    with pytest.raises(ValueError):
        correspondences(_asymmetric_mesh(), box_mesh((1, 1, 1)), l=2)


def test_correspondence_set_validates():
    with pytest.raises(ValueError):
        CorrespondenceSet(np.zeros((2, 2), dtype=int))
    with pytest.raises(ValueError):
        CorrespondenceSet(np.zeros((5, 3), dtype=int))


# --- template selection ---

def _record(object_id, env_id, mesh):
    return types.SimpleNamespace(object_id=object_id, env_id=env_id,
                                 mesh=mesh, descriptor=descriptor(mesh))


def _library(records):
    return types.SimpleNamespace(records=records)


def test_select_template_picks_most_similar():
    bar = box_mesh((3.0, 1.0, 1.0))
    slab = plate(3.0, 3.0, 0.4)
    cube = box_mesh((1.2, 1.2, 1.2))
    lib = _library([_record("bar", "env", bar), _record("slab", "env", slab),
                    _record("cube", "env", cube)])
    rng = np.random.default_rng(72)
    query = TriMesh(np.asarray(slab.vertices) + rng.normal(scale=0.01, size=(8, 3)),
                    slab.triangles)
    record, corr = select_template(query, lib, "env")
    assert record.object_id == "slab"
    assert len(corr) >= 3


def test_select_template_filters_by_environment():
    cube = box_mesh((1.0, 1.0, 1.0))
    lib = _library([_record("a", "env1", cube), _record("b", "env2", cube)])
    record, _ = select_template(cube, lib, "env2")
    assert record.object_id == "b"


def test_select_template_ties_break_by_object_id():
    cube = box_mesh((1.0, 1.0, 1.0))
    lib = _library([_record("zeta", "env", cube), _record("alpha", "env", cube)])
    record, _ = select_template(cube, lib, "env")
    assert record.object_id == "alpha"


def test_select_template_raises_on_unknown_env():
    lib = _library([_record("a", "env1", box_mesh((1, 1, 1)))])
    with pytest.raises(LookupError):
        select_template(box_mesh((1, 1, 1)), lib, "env9")
