import math

import numpy as np
import pytest

from minnet.errors import NotPlanarBoundary, NotReflectable, OrbitExplosion
from minnet.holomorphic import power_function
from minnet.minimal import (MinimalPair, is_asymptotic, quad_curvatures,
                            tangent_normals, weierstrass_asymptotic)
from minnet.mobius import (Isometry, PlaneR3, fit_plane_through_origin,
                           stereographic_project)
from minnet.net import EdgeLabels, LatticeDomain, Net3, is_isothermic
from minnet.reflection import (analyze_boundary_asymptotic,
                               analyze_boundary_isothermic, build_orbit,
                               close_group, corner_angles, reflect_isothermic,
                               rotate_extend_asymptotic)


def sphere_band(radius=2.0, rows=2, cols=6, dphi=0.25, dtheta=0.2):
    """Lat-long band on a sphere below the equator; top row is the equator."""
    dom = LatticeDomain((0, cols), (-rows, 0))
    positions = {}
    for (m, n) in dom.vertices:
        phi = m * dphi
        theta = n * dtheta
        positions[(m, n)] = radius * np.array(
            [math.cos(phi) * math.cos(theta),
             math.sin(phi) * math.cos(theta), math.sin(theta)])
    net = Net3(dom, positions)
    normals = Net3(dom, {v: positions[v] / radius for v in dom.vertices},
                   check_edges=False)
    return net, normals, radius


class TestAnalyzeIsothermic:
    def test_enneper_boundaries(self, enneper_pair):
        f, n = enneper_pair.isothermic, enneper_pair.gauss
        for axis, idx in (("row", 0), ("col", 0)):
            a = analyze_boundary_isothermic(f, n, idx, axis)
            assert a.kind == "planar_curvature_line"
            assert a.gauss_circle == "great_circle"
            assert a.residuals["tests_agree"]

    def test_generic_row_is_none(self, enneper_pair):
        f, n = enneper_pair.isothermic, enneper_pair.gauss
        a = analyze_boundary_isothermic(f, n, f.domain.n1, "row")
        assert a.kind == "none"
        assert a.residuals["congruence_plane"] > 1e-3

    def test_cone_normals_small_circle(self):
        # planar row whose tilted normals sit on a small circle: the row
        # itself is planar but the congruence leaves the plane
        dom = LatticeDomain((0, 5), (0, 1))
        tilt = 0.5
        positions, normals = {}, {}
        for (m, n) in dom.vertices:
            phi = 0.3 * m
            r = 2.0 + 0.8 * n
            positions[(m, n)] = np.array([r * math.cos(phi), r * math.sin(phi),
                                          1.2 * n])
            normals[(m, n)] = np.array([math.cos(tilt) * math.cos(phi),
                                        math.cos(tilt) * math.sin(phi),
                                        math.sin(tilt)])
        net = Net3(dom, positions)
        nrm = Net3(dom, normals, check_edges=False)
        a = analyze_boundary_isothermic(net, nrm, 0, "row")
        assert a.kind == "none"
        assert a.gauss_circle == "small_circle"


class TestAnalyzeAsymptotic:
    def test_conjugate_enneper_boundary(self, enneper_pair):
        a = analyze_boundary_asymptotic(enneper_pair.asymptotic, 0, "row")
        assert a.kind == "straight_asymptotic_line"
        assert a.residuals["gauss_perpendicular"] < 1e-9

    def test_generic_row_is_none(self, enneper_pair):
        ft = enneper_pair.asymptotic
        a = analyze_boundary_asymptotic(ft, ft.domain.n1, "row")
        assert a.kind == "none"

    def test_line_direction_is_gauss_plane_normal(self, enneper_pair):
        # along a straight asymptotic line the edges are parallel to the
        # normal of the plane of the Gauss image
        ft, lift = enneper_pair.asymptotic, enneper_pair.gauss
        a = analyze_boundary_asymptotic(ft, 0, "row")
        npts = np.array([lift[(m, 0)] for m in range(ft.domain.m0,
                                                     ft.domain.m1 + 1)])
        plane, res = fit_plane_through_origin(npts)
        assert res < 1e-9
        cross = np.linalg.norm(np.cross(plane.normal, a.line.direction))
        assert cross < 1e-9


class TestReflectIsothermic:
    def test_full_enneper(self, enneper_pair):
        f, n = enneper_pair.isothermic, enneper_pair.gauss
        labels = enneper_pair.grid.labels
        f_ext, n_ext, lab_ext = reflect_isothermic(f, n, 0, labels=labels)
        assert f_ext.domain.n_range == (-f.domain.n1, f.domain.n1)
        report = is_isothermic(f_ext, lab_ext, 1e-9)
        assert report.ok
        worst = max(abs(quad_curvatures(f_ext.quad_points(q),
                                        n_ext.quad_points(q)).H)
                    for q in f_ext.domain.quads)
        assert worst <= 1e-9

    def test_extension_is_symmetric(self, enneper_pair):
        f, n = enneper_pair.isothermic, enneper_pair.gauss
        analysis = analyze_boundary_isothermic(f, n, 0, "row")
        iso = Isometry.plane_reflection(analysis.plane)
        f_ext, n_ext, _ = reflect_isothermic(f, n, 0, labels=enneper_pair.grid.labels)
        worst = max(np.linalg.norm(iso.apply(f_ext[(m, k)]) - f_ext[(m, -k)])
                    for (m, k) in f_ext.domain.vertices)
        assert worst <= 1e-12 * f_ext.scale()

    def test_column_reflection(self, enneper_pair):
        f, n = enneper_pair.isothermic, enneper_pair.gauss
        f_ext, n_ext, lab = reflect_isothermic(f, n, 0, axis="col",
                                               labels=enneper_pair.grid.labels)
        assert f_ext.domain.m_range == (-f.domain.m1, f.domain.m1)
        assert is_isothermic(f_ext, lab, 1e-9).ok

    def test_not_reflectable(self, enneper_pair):
        f, n = enneper_pair.isothermic, enneper_pair.gauss
        with pytest.raises(NotReflectable):
            reflect_isothermic(f, n, f.domain.n1)

    def test_cmc_sphere_band_preserved(self):
        # spherical band: every quad has H = -1/R exactly; reflecting
        # across the equator plane must preserve that constant
        net, normals, radius = sphere_band()
        h0 = [quad_curvatures(net.quad_points(q), normals.quad_points(q)).H
              for q in net.domain.quads]
        assert max(abs(h + 1.0 / radius) for h in h0) < 1e-12
        f_ext, n_ext, _ = reflect_isothermic(net, normals, 0)
        hs = [quad_curvatures(f_ext.quad_points(q), n_ext.quad_points(q)).H
              for q in f_ext.domain.quads]
        assert max(abs(h + 1.0 / radius) for h in hs) < 1e-12

    def test_masked_domain_reflects(self, planar_enneper_pair):
        f, n = planar_enneper_pair.isothermic, planar_enneper_pair.gauss
        f_ext, n_ext, lab = reflect_isothermic(
            f, n, 0, labels=planar_enneper_pair.grid.labels)
        assert (0, 0) not in f_ext.domain
        assert is_isothermic(f_ext, lab, 1e-9).ok


class TestRotateExtendAsymptotic:
    def test_conjugate_enneper(self, enneper_pair):
        ft = enneper_pair.asymptotic
        ft_ext, _ = rotate_extend_asymptotic(ft, 0,
                                             labels=enneper_pair.grid.labels)
        report = is_asymptotic(ft_ext, 1e-9)
        assert report.ok

    def test_extension_is_symmetric(self, enneper_pair):
        ft = enneper_pair.asymptotic
        analysis = analyze_boundary_asymptotic(ft, 0, "row")
        iso = Isometry.line_rotation_180(analysis.line)
        ft_ext, _ = rotate_extend_asymptotic(ft, 0)
        worst = max(np.linalg.norm(iso.apply(ft_ext[(m, k)]) - ft_ext[(m, -k)])
                    for (m, k) in ft_ext.domain.vertices)
        assert worst <= 1e-12 * ft_ext.scale()

    def test_matches_conjugate_of_extended_isothermic(self, enneper_pair):
        # the rotation extension equals the conjugate net built from the
        # mirrored Gauss data, up to translation
        f, n = enneper_pair.isothermic, enneper_pair.gauss
        labels = enneper_pair.grid.labels
        f_ext, n_ext, lab_ext = reflect_isothermic(f, n, 0, labels=labels)
        from minnet.holomorphic import HoloGrid
        g_ext = HoloGrid(n_ext.domain,
                         {v: stereographic_project(n_ext[v])
                          for v in n_ext.domain.vertices}, lab_ext)
        conj = weierstrass_asymptotic(g_ext)
        ft_ext, _ = rotate_extend_asymptotic(enneper_pair.asymptotic, 0,
                                             labels=labels)
        shift = ft_ext[(0, 0)] - conj[(0, 0)]
        worst = max(np.linalg.norm(conj[v] + shift - ft_ext[v])
                    for v in conj.domain.vertices)
        assert worst <= 1e-8 * ft_ext.scale()

    def test_not_reflectable(self, enneper_pair):
        with pytest.raises(NotReflectable):
            rotate_extend_asymptotic(enneper_pair.asymptotic,
                                     enneper_pair.asymptotic.domain.n1)


class TestConjugateDuality:
    def test_equivalence_on_all_boundaries(self, enneper_pairs,
                                           planar_enneper_pair):
        pairs = list(enneper_pairs.values()) + [planar_enneper_pair]
        for pair in pairs:
            f, ft, n = pair.isothermic, pair.asymptotic, pair.gauss
            dom = f.domain
            for axis, idx in (("row", dom.n0), ("row", dom.n1),
                              ("col", dom.m0), ("col", dom.m1)):
                iso = analyze_boundary_isothermic(f, n, idx, axis)
                asym = analyze_boundary_asymptotic(ft, idx, axis)
                planar = iso.kind == "planar_curvature_line"
                straight = asym.kind == "straight_asymptotic_line"
                assert planar == straight, (axis, idx)
                if planar:
                    assert iso.residuals["congruence_plane"] <= 1e-9 * f.scale()
                    assert asym.residuals["line"] <= 1e-9 * ft.scale()


class TestCornerAngles:
    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_enneper_angle(self, enneper_pairs, k):
        pair = enneper_pairs[k]
        ap, aq = corner_angles(pair.isothermic, pair.gauss, (0, 0))
        assert abs(ap - math.pi / (k + 1)) < 1e-6
        assert abs(ap + aq - math.pi) < 1e-9

    def test_planar_enneper_angle(self, planar_enneper_pair):
        ap, aq = corner_angles(planar_enneper_pair.isothermic,
                               planar_enneper_pair.gauss, (0, 0))
        assert abs(ap - math.pi / 2) < 1e-6
        assert abs(ap + aq - math.pi) < 1e-9

    def test_non_corner_rejected(self, enneper_pair):
        with pytest.raises(NotPlanarBoundary):
            corner_angles(enneper_pair.isothermic, enneper_pair.gauss, (1, 1))


class TestOrbit:
    def test_enneper_dihedral_eight(self, enneper_pair):
        f, n = enneper_pair.isothermic, enneper_pair.gauss
        r1 = Isometry.plane_reflection(
            analyze_boundary_isothermic(f, n, 0, "row").plane)
        r2 = Isometry.plane_reflection(
            analyze_boundary_isothermic(f, n, 0, "col").plane)
        orbit = build_orbit(f, [r1, r2], max_word=12)
        assert len(orbit.elements) == 8
        assert orbit.weld_residual <= 1e-9
        assert orbit.closure_residual() <= 1e-9
        assert len(orbit.vertices) < 8 * len(f.domain.vertices)

    def test_generators_permute_welded_mesh(self, enneper_pair):
        f, n = enneper_pair.isothermic, enneper_pair.gauss
        r1 = Isometry.plane_reflection(
            analyze_boundary_isothermic(f, n, 0, "row").plane)
        r2 = Isometry.plane_reflection(
            analyze_boundary_isothermic(f, n, 0, "col").plane)
        orbit = build_orbit(f, [r1, r2], max_word=12)
        scale = orbit.scale()
        assert orbit.invariance_residual(r1) <= 1e-9 * scale
        assert orbit.invariance_residual(r2) <= 1e-9 * scale

    def test_irrational_angle_explodes(self, enneper_pair):
        p1 = PlaneR3((0, 1, 0), 0.0)
        p2 = PlaneR3((math.sin(1.0), math.cos(1.0), 0.0), 0.0)
        with pytest.raises(OrbitExplosion):
            build_orbit(enneper_pair.isothermic,
                        [Isometry.plane_reflection(p1),
                         Isometry.plane_reflection(p2)],
                        max_word=64, max_elements=64)

    def test_close_group_identity_only(self):
        elements = close_group([Isometry.identity()])
        assert len(elements) == 1


class TestPlanarityLemma:
    def test_row_planar_iff_gauss_image_concircular(self, enneper_pair,
                                                    planar_enneper_pair):
        # both directions of the curvature-line planarity characterization:
        # a lattice row of F is planar exactly when the Gauss image of the
        # row is concircular (coplanar on the unit sphere)
        from minnet.net import planarity_residual
        for pair in (enneper_pair, planar_enneper_pair):
            f, lift = pair.isothermic, pair.gauss
            dom = f.domain
            seen_true = seen_false = False
            for idx in range(dom.n0, dom.n1 + 1):
                verts = [(m, idx) for m in range(dom.m0, dom.m1 + 1)
                         if (m, idx) in dom]
                if len(verts) < 4:
                    continue
                fr = np.array([f[v] for v in verts])
                nr = np.array([lift[v] for v in verts])
                scale = np.linalg.norm(fr.max(axis=0) - fr.min(axis=0))
                row_planar = planarity_residual(fr) <= 1e-9 * scale
                gauss_circ = planarity_residual(nr) <= 1e-9
                assert row_planar == gauss_circ, (idx, row_planar, gauss_circ)
                seen_true = seen_true or row_planar
                seen_false = seen_false or not row_planar
            assert seen_true and seen_false
