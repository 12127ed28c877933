import numpy as np
import pytest
from matplotlib import colormaps

from jointscope.classifier import FunctionScorer
from jointscope.synthgen import DefectKind, JointSpec, render_joint
from jointscope.xai import (
    CriticalFactor,
    ImportanceMap,
    ScorerRegionError,
    deletion_score,
    explain_image,
    export_explanation,
    extract_critical_factors,
    occlusion_importance,
    refine_within_factors,
    render_overlay,
    union_factor_mask,
)


def _cell_rect_mask(cells, cell_px=16):
    mask = np.zeros((256, 256), bool)
    for r, c in cells:
        mask[r * cell_px:(r + 1) * cell_px, c * cell_px:(c + 1) * cell_px] = True
    return mask


def test_constant_scorer_yields_zero_map():
    scorer = FunctionScorer(lambda img: 0.7)
    img = np.random.default_rng(0).uniform(0, 1, (256, 256, 3)).astype(np.float32)
    imap = occlusion_importance(img, scorer)
    assert np.array_equal(imap.grid, np.zeros((16, 16)))
    assert imap.base_confidence == 0.7


def test_single_cell_scorer_isolates_delta():
    # scorer reads only grid cell (3, 3); zero baseline removes exactly it
    def cell_mean(img):
        return float(img[48:64, 48:64].mean())

    rng = np.random.default_rng(1)
    img = rng.uniform(0.2, 0.9, (256, 256, 3)).astype(np.float32)
    expected = cell_mean(img)
    imap = occlusion_importance(img, FunctionScorer(cell_mean), baseline=0.0)
    assert imap.grid[3, 3] == pytest.approx(expected, abs=1e-6)
    others = imap.grid.copy()
    others[3, 3] = 0.0
    assert np.allclose(others, 0.0)


def test_occlusion_restores_image():
    img = np.random.default_rng(2).uniform(0, 1, (256, 256, 3)).astype(np.float32)
    snapshot = img.copy()
    occlusion_importance(img, FunctionScorer(lambda x: float(x.mean())))
    assert np.array_equal(img, snapshot)


def test_occlusion_propagates_scorer_failure_with_cell():
    calls = {"n": 0}

    def flaky(img):
        calls["n"] += 1
        if calls["n"] == 5:
            raise RuntimeError("dead")
        return 0.5

    img = np.zeros((256, 256, 3), np.float32)
    with pytest.raises(ScorerRegionError, match=r"cell \(0, 3\)"):
        occlusion_importance(img, FunctionScorer(flaky))


def test_occlusion_grid_must_divide():
    img = np.zeros((256, 256, 3), np.float32)
    with pytest.raises(ValueError):
        occlusion_importance(img, FunctionScorer(lambda x: 0.0), grid=10)


def _imap(grid, base=0.9):
    grid = np.asarray(grid, np.float64)
    return ImportanceMap(grid=grid, cell_px=256 // grid.shape[0], base_confidence=base)


def test_extract_single_positive_cell():
    grid = np.zeros((16, 16))
    grid[4, 9] = 0.3
    factors = extract_critical_factors(_imap(grid))
    assert len(factors) == 1
    assert factors[0].cells == [(4, 9)]


def test_extract_four_equal_cells_all_needed():
    grid = np.zeros((16, 16))
    for c in range(4):
        grid[2, 2 * c] = 0.25  # disconnected cells, three cover only 0.75
    factors = extract_critical_factors(_imap(grid), rho=0.8)
    selected = sorted(cell for f in factors for cell in f.cells)
    assert selected == [(2, 0), (2, 2), (2, 4), (2, 6)]


def test_extract_all_nonpositive_returns_empty():
    assert extract_critical_factors(_imap(np.zeros((16, 16)))) == []
    assert extract_critical_factors(_imap(-np.ones((16, 16)))) == []


def test_extract_never_selects_nonpositive_cells():
    grid = np.zeros((8, 8))
    grid[0, 0] = 1.0
    grid[7, 7] = -5.0
    factors = extract_critical_factors(_imap(grid), rho=1.0)
    cells = [c for f in factors for c in f.cells]
    assert (7, 7) not in cells


def test_extract_groups_four_connected_components():
    grid = np.zeros((16, 16))
    grid[3, 3] = grid[3, 4] = 0.4   # one component
    grid[10, 10] = 0.4              # another (diagonal is not connected)
    grid[11, 11] = 0.4
    factors = extract_critical_factors(_imap(grid), rho=1.0)
    assert sorted(len(f.cells) for f in factors) == [1, 1, 2]


def test_extract_coverage_property_on_random_maps():
    rng = np.random.default_rng(7)
    for _ in range(100):
        grid = rng.normal(0, 1, (16, 16))
        rho = float(rng.uniform(0.2, 1.0))
        factors = extract_critical_factors(_imap(grid), rho=rho)
        total = grid[grid > 0].sum()
        if total <= 0:
            assert factors == []
            continue
        covered = sum(grid[r, c] for f in factors for r, c in f.cells)
        assert covered >= rho * total - 1e-12


def test_extract_minimality_on_random_maps():
    rng = np.random.default_rng(11)
    for _ in range(60):
        grid = rng.uniform(-1, 1, (16, 16))  # continuous, ties have measure zero
        rho = 0.8
        factors = extract_critical_factors(_imap(grid), rho=rho)
        total = grid[grid > 0].sum()
        if total <= 0:
            continue
        selected = [grid[r, c] for f in factors for r, c in f.cells]
        assert min(selected) > 0
        assert sum(selected) - min(selected) < rho * total


def test_refine_constant_subdeltas_give_flat_unit_heatmap():
    # scorer blind to the image: every sub-occlusion leaves the score at base
    scorer = FunctionScorer(lambda img: 0.9)
    img = np.full((256, 256, 3), 0.5, np.float32)
    grid = np.zeros((16, 16))
    grid[2, 2] = 0.5
    imap = _imap(grid, base=0.9)
    factors = [CriticalFactor(cells=[(2, 2)], mask=_cell_rect_mask([(2, 2)]))]
    expl = refine_within_factors(img, scorer, imap, factors)
    factor = expl.factors[0]
    inside = _cell_rect_mask([(2, 2)])
    assert np.array_equal(factor.mask, inside)
    assert np.allclose(factor.heatmap[inside], 1.0)
    assert np.allclose(factor.heatmap[~inside], 0.0)


def test_refine_single_cell_known_subdeltas():
    # score = 0.4*mean(q00) + 0.1*mean(q01) + 0.0*mean(q10) + 0.1*mean(q11)
    # over cell (0,0) quadrants; zero baseline gives sub-deltas [.4,.1,0,.1]
    def quad_scorer(img):
        return float(
            0.4 * img[0:8, 0:8].mean()
            + 0.1 * img[0:8, 8:16].mean()
            + 0.0 * img[8:16, 0:8].mean()
            + 0.1 * img[8:16, 8:16].mean()
        )

    img = np.ones((256, 256, 3), np.float32)
    base = quad_scorer(img)
    grid = np.zeros((16, 16))
    grid[0, 0] = base
    imap = _imap(grid, base=base)
    factors = [CriticalFactor(cells=[(0, 0)], mask=_cell_rect_mask([(0, 0)]))]
    expl = refine_within_factors(img, FunctionScorer(quad_scorer), imap, factors,
                                 subdivide=2, baseline=0.0)
    heat = expl.factors[0].heatmap
    assert heat[0:8, 0:8] == pytest.approx(1.0)
    assert heat[0:8, 8:16] == pytest.approx(0.25)
    assert heat[8:16, 0:8] == pytest.approx(0.0)
    assert heat[8:16, 8:16] == pytest.approx(0.25)
    # the zero-impact quadrant drops out of the mask
    assert not expl.factors[0].mask[8:16, 0:8].any()
    assert expl.factors[0].mask[0:8, 0:8].all()


def test_refine_heatmap_range_invariant(scorer):
    res = render_joint(JointSpec(seed=31, kind=DefectKind.BURN, pad_radius_px=60, board_hue=0.3))
    img = res.image.astype(np.float32) / 255.0
    expl = explain_image(img, scorer)
    assert expl.factors
    for f in expl.factors:
        inside = f.heatmap[f.mask]
        assert inside.min() >= 0.0
        assert inside.max() == pytest.approx(1.0)
        assert np.allclose(f.heatmap[~f.mask], 0.0)
    assert 0.0 < expl.mass_fraction <= 1.0


def test_deletion_empty_mask_is_zero(scorer, splash_render):
    img, _ = splash_render
    assert deletion_score(img, scorer, np.zeros((256, 256), bool)) == 0.0


def test_deletion_full_mask_matches_definition(scorer, splash_render):
    img, _ = splash_render
    full = np.ones((256, 256), bool)
    fill = img.reshape(-1, 3).mean(axis=0)
    blank = np.broadcast_to(fill, (256, 256, 3)).astype(np.float32)
    expected = scorer.score(img) - scorer.score(blank)
    assert deletion_score(img, scorer, full) == pytest.approx(expected, abs=1e-9)


def test_deletion_critical_beats_random(scorer, splash_render):
    img, truth = splash_render
    expl = explain_image(img, scorer)
    crit = deletion_score(img, scorer, union_factor_mask(expl))
    rng = np.random.default_rng(3)
    area = int(union_factor_mask(expl).sum())
    side = max(1, int(round(np.sqrt(area))))
    rand_mask = np.zeros((256, 256), bool)
    r0, c0 = rng.integers(0, 256 - side, 2)
    rand_mask[r0:r0 + side, c0:c0 + side] = True
    assert crit > 2 * abs(deletion_score(img, scorer, rand_mask))


def test_localization_on_splash(scorer, splash_render):
    img, truth = splash_render
    expl = explain_image(img, scorer)
    argmax_cell = np.unravel_index(np.argmax(expl.importance.grid), (16, 16))
    r, c = argmax_cell
    assert truth.defect_mask[r * 16:(r + 1) * 16, c * 16:(c + 1) * 16].any()


def test_render_overlay_empty_explanation_is_identity(splash_render):
    img, _ = splash_render
    expl = explain_image(img, FunctionScorer(lambda x: 0.5))
    assert expl.factors == []
    out = render_overlay(img, expl)
    assert out.shape == (256, 256, 4)
    assert np.array_equal(out[..., 3], np.full((256, 256), 255))
    expected = np.clip(np.rint(img * 255), 0, 255).astype(np.uint8)
    assert np.array_equal(out[..., :3], expected)


def test_render_overlay_rectangular_factor_boundary_is_white():
    img = np.full((256, 256, 3), 0.25, np.float32)
    mask = np.zeros((256, 256), bool)
    mask[32:64, 96:160] = True
    heat = np.where(mask, 0.7, 0.0).astype(np.float32)
    factor = CriticalFactor(cells=[(2, 6)], mask=mask, heatmap=heat)
    expl = refine_dummy(img, factor)
    out = render_overlay(img, expl)
    boundary = mask.copy()
    boundary[33:63, 97:159] = False
    assert (out[boundary, :3] == 255).all()
    interior = mask & ~boundary
    assert not (out[interior, :3] == 255).all(axis=1).any()
    outside = ~mask
    base = np.clip(np.rint(img * 255), 0, 255).astype(np.uint8)
    assert np.array_equal(out[outside, :3], base[outside])


def refine_dummy(img, factor):
    grid = np.zeros((16, 16))
    for r, c in factor.cells:
        grid[r, c] = 1.0
    from jointscope.xai import Explanation

    return Explanation(importance=_imap(grid), factors=[factor], mass_fraction=1.0)


def test_render_overlay_constant_heat_uniform_tint():
    img = np.full((256, 256, 3), 0.5, np.float32)
    mask = np.zeros((256, 256), bool)
    mask[64:96, 64:96] = True
    heat = np.where(mask, 1.0, 0.0).astype(np.float32)
    factor = CriticalFactor(cells=[(4, 4), (4, 5), (5, 4), (5, 5)], mask=mask, heatmap=heat)
    out = render_overlay(img, refine_dummy(img, factor))
    boundary = mask.copy()
    boundary[65:95, 65:95] = False
    interior = mask & ~boundary
    base = np.clip(np.rint(img * 255), 0, 255).astype(np.uint8)
    cmap_rgb = np.array(colormaps["jet"](1.0)[:3]) * 255.0
    expected = np.rint(0.5 * base[interior].astype(np.float64) + 0.5 * cmap_rgb).astype(np.uint8)
    assert np.array_equal(out[interior, :3], expected)


def test_export_explanation_round_trip(tmp_path, scorer, splash_render):
    img, _ = splash_render
    expl = explain_image(img, scorer)
    doc = export_explanation(expl, tmp_path, "case1")
    assert (tmp_path / "case1.json").exists()
    assert doc["grid_size"] == 16 and doc["cell_px"] == 16
    assert len(doc["cell_deltas"]) == 256
    assert len(doc["factors"]) == len(expl.factors)
    for entry in doc["factors"]:
        assert entry["cells"]
        if "heatmap_png_path" in entry:
            assert (tmp_path / entry["heatmap_png_path"].split("/")[-1]).exists()
            r0, c0, r1, c1 = entry["bbox"]
            assert r0 < r1 and c0 < c1
