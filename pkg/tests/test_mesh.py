"""Mesh construction, OBJ export, the embeddedness probe, and the sweep."""

import math

import numpy as np
import pytest

from helikon.errors import (
    DisconnectedSampling,
    NotVerticalFlux,
    ThresholdOrder,
)
from helikon.expr import Plane, PuncturedPlane, parse_expr
from helikon.mesh import (
    SamplingSpec,
    build_mesh,
    default_thresholds,
    export_mesh,
    lambda_sweep,
    probe_self_intersection,
)
from helikon.paths import circle
from helikon.surface import CycleBasis, WeierstrassData

PLANE = Plane()
PUNCTURED = PuncturedPlane((0,))


def helicoid():
    return WeierstrassData(
        g=parse_expr("exp(i*u)", PLANE),
        dh=parse_expr("1 du", PLANE),
        basepoint=0.0,
        label="helicoid",
    )


def catenoid():
    return WeierstrassData(
        g=parse_expr("u", PUNCTURED),
        dh=parse_expr("1/u du", PUNCTURED),
        basepoint=1.0,
        label="catenoid",
    )


def enneper():
    return WeierstrassData(
        g=parse_expr("u", PLANE),
        dh=parse_expr("u du", PLANE),
        basepoint=0.0,
        label="enneper",
    )


def catenoid_spec(n=30):
    return SamplingSpec(-2, 2, -2, 2, nx=n, ny=n, exclusions=((0, 0.45),))


def helicoid_exact(u):
    x, y = u.real, u.imag
    return np.array(
        [math.sin(x) * math.sinh(y), -math.cos(x) * math.sinh(y), x]
    )


class TestSamplingSpec:
    def test_empty_rectangle(self):
        with pytest.raises(ValueError):
            SamplingSpec(1.0, 1.0, 0.0, 1.0)

    def test_bad_resolution(self):
        with pytest.raises(ValueError):
            SamplingSpec(0, 1, 0, 1, nx=0)

    def test_grid_corners(self):
        spec = SamplingSpec(-1, 1, -2, 2, nx=5, ny=9)
        assert spec.grid_point(0, 0) == complex(-1, -2)
        assert spec.grid_point(4, 8) == complex(1, 2)

    def test_exclusion_mask(self):
        spec = SamplingSpec(-1, 1, -1, 1, nx=3, ny=3, exclusions=((0, 0.5),))
        mask = spec.inclusion_mask()
        assert not mask[1, 1]  # center excluded
        assert mask[0, 0]


class TestBuildMesh:
    def test_helicoid_vertices_closed_form(self):
        # 21x21 over [-pi, pi] x [-1, 1] puts pi/2 + i and the basepoint 0
        # exactly on the grid
        spec = SamplingSpec(-math.pi, math.pi, -1.0, 1.0, nx=21, ny=21)
        mesh = build_mesh(helicoid(), spec)
        assert len(mesh.vertices) == 441
        for u, p, _ in mesh.vertices:
            assert np.linalg.norm(p - helicoid_exact(u)) < 1e-8

    def test_single_vertex_grid(self):
        spec = SamplingSpec(0.0, 1.0, 0.0, 1.0, nx=1, ny=1)
        mesh = build_mesh(helicoid(), spec)
        assert len(mesh.vertices) == 1
        assert not mesh.faces and not mesh.edges

    def test_catenoid_annulus_height(self):
        # third coordinate of the catenoid is log|u| (basepoint at |u| = 1)
        mesh = build_mesh(catenoid(), catenoid_spec())
        for u, p, _ in mesh.vertices:
            assert abs(p[2] - math.log(abs(u))) < 1e-9

    def test_intrinsic_length_dominates_chord(self):
        mesh = build_mesh(catenoid(), catenoid_spec(12))
        pos = mesh.positions()
        for a, b, length in mesh.edges:
            chord = float(np.linalg.norm(pos[a] - pos[b]))
            assert length >= chord - 1e-12

    def test_disconnected_sampling(self):
        # the disk severs the thin rectangle into left and right parts
        spec = SamplingSpec(
            -1, 1, -0.2, 0.2, nx=21, ny=5, exclusions=((0, 0.5),)
        )
        with pytest.raises(DisconnectedSampling):
            build_mesh(helicoid(), spec)

    def test_everything_excluded(self):
        spec = SamplingSpec(-1, 1, -1, 1, nx=5, ny=5, exclusions=((0, 9.0),))
        with pytest.raises(DisconnectedSampling):
            build_mesh(helicoid(), spec)


class TestExport:
    def test_obj_round_trip_counts(self):
        spec = SamplingSpec(-1, 1, -1, 1, nx=4, ny=4)
        mesh = build_mesh(helicoid(), spec)
        text = export_mesh(mesh).decode("ascii")
        lines = text.strip().split("\n")
        nv = sum(1 for l in lines if l.startswith("v "))
        nn = sum(1 for l in lines if l.startswith("vn "))
        nf = sum(1 for l in lines if l.startswith("f "))
        assert nv == nn == 16
        assert nf == len(mesh.faces) == 18
        # face indices are 1-based and in range
        for l in lines:
            if l.startswith("f "):
                for tok in l.split()[1:]:
                    idx = int(tok.split("//")[0])
                    assert 1 <= idx <= nv

    def test_obj_vertex_precision(self):
        spec = SamplingSpec(-math.pi, math.pi, -1.0, 1.0, nx=21, ny=21)
        mesh = build_mesh(helicoid(), spec)
        text = export_mesh(mesh).decode("ascii")
        first = next(l for l in text.split("\n") if l.startswith("v "))
        got = np.array([float(t) for t in first.split()[1:]])
        assert np.linalg.norm(got - mesh.vertices[0][1]) < 1e-7

    def test_empty_mesh_refused(self):
        from helikon.mesh import SurfaceMesh

        with pytest.raises(ValueError):
            export_mesh(SurfaceMesh(vertices=[], faces=[], edges=[]))

    def test_unknown_format_refused(self):
        spec = SamplingSpec(-1, 1, -1, 1, nx=2, ny=2)
        mesh = build_mesh(helicoid(), spec)
        with pytest.raises(ValueError):
            export_mesh(mesh, fmt="stl")


class TestProbe:
    def test_helicoid_is_embedded(self):
        spec = SamplingSpec(-math.pi, math.pi, -1.0, 1.0, nx=40, ny=40)
        mesh = build_mesh(helicoid(), spec)
        rep = probe_self_intersection(mesh, delta_ext=0.05, delta_int=1.0)
        assert rep.embedded and not rep.pairs

    def test_enneper_self_intersection_found(self):
        spec = SamplingSpec(-2.2, 2.2, -2.2, 2.2, nx=48, ny=48)
        mesh = build_mesh(enneper(), spec)
        rep = probe_self_intersection(mesh, delta_ext=0.05, delta_int=2.0)
        assert not rep.embedded
        assert rep.pairs
        # pairs are sorted by extrinsic distance and respect both thresholds
        ext = [p[2] for p in rep.pairs]
        assert ext == sorted(ext)
        for _, _, d, intrinsic in rep.pairs:
            assert d < 0.05
            assert intrinsic > rep.delta_int

    def test_threshold_order_guard(self):
        spec = SamplingSpec(-math.pi, math.pi, -1.0, 1.0, nx=10, ny=10)
        mesh = build_mesh(helicoid(), spec)
        with pytest.raises(ThresholdOrder):
            probe_self_intersection(mesh, delta_ext=0.05, delta_int=0.01)

    def test_default_thresholds_scale_with_bbox(self):
        spec = SamplingSpec(-math.pi, math.pi, -1.0, 1.0, nx=10, ny=10)
        mesh = build_mesh(helicoid(), spec)
        d_ext, d_int = default_thresholds(mesh)
        assert abs(d_ext - 0.02 * mesh.bounding_box_diagonal()) < 1e-12
        assert abs(d_int - 20.0 * d_ext) < 1e-12


class TestSweep:
    def test_catenoid_sweep_no_flip(self):
        basis = CycleBasis([circle(0, 1.0)], ["neck"])
        res = lambda_sweep(
            catenoid(),
            [0.5, 1.0, 2.0],
            catenoid_spec(),
            basis=basis,
            delta_ext=0.05,
            delta_int=2.0,
        )
        assert [lam for lam, _, _ in res.table] == [0.5, 1.0, 2.0]
        assert all(emb for _, emb, _ in res.table)
        assert all(resid < 1e-10 for _, _, resid in res.table)
        assert res.bracket is None

    def test_horizontal_flux_rejected(self):
        data = WeierstrassData(
            g=parse_expr("u + 2", PUNCTURED),
            dh=parse_expr("1/u du", PUNCTURED),
            basepoint=1.0,
        )
        basis = CycleBasis([circle(0, 0.5)], ["loop"])
        with pytest.raises(NotVerticalFlux):
            lambda_sweep(data, [1.0], catenoid_spec(8), basis=basis)
