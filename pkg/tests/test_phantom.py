"""Tests for the synthetic phantom generator."""

import numpy as np
import pytest

from usegnet.data import generate_phantom, tissue_fractions
from usegnet.models import LabelConvention, PhantomSpec, TissueClass


class TestPhantom:
    """Test cases for generate_phantom."""

    def test_deterministic(self, phantom_spec):
        """Test that the same spec yields identical volumes."""
        a_vol, a_lab = generate_phantom(phantom_spec)
        b_vol, b_lab = generate_phantom(phantom_spec)
        np.testing.assert_array_equal(a_vol.voxels, b_vol.voxels)
        np.testing.assert_array_equal(a_lab.labels, b_lab.labels)

    def test_seeds_differ(self, phantom_spec):
        """Test that another seed changes the volume."""
        other = phantom_spec.model_copy(update={"seed": phantom_spec.seed + 1})
        assert not np.array_equal(
            generate_phantom(phantom_spec)[0].voxels, generate_phantom(other)[0].voxels
        )

    def test_shapes_and_provenance(self, phantom):
        """Test dims, convention and provenance."""
        vol, lv = phantom
        assert vol.dims == lv.dims == (48, 48, 3)
        assert lv.convention is LabelConvention.MODEL
        assert vol.provenance == "phantom:seed=7"

    def test_background_is_exactly_zero(self, phantom):
        """Test that noise and bias stay inside the brain."""
        vol, lv = phantom
        assert not vol.voxels[lv.labels == TissueClass.BACKGROUND].any()
        assert (vol.voxels[lv.labels != TissueClass.BACKGROUND] != 0).all()

    def test_all_classes_present(self, phantom):
        """Test that every slice holds all four classes."""
        _, lv = phantom
        for z in range(lv.dims[2]):
            assert set(np.unique(lv.axial_slice(z))) == {0, 1, 2, 3}

    def test_noise_free_intensities(self):
        """Test that without noise and bias each class has its exact mean."""
        spec = PhantomSpec(dims=(48, 48, 2), seed=3, noise_std=0.0, bias_amplitude=0.0)
        vol, lv = generate_phantom(spec)
        for cls, mean in [
            (TissueClass.GM, spec.gm_mean),
            (TissueClass.WM, spec.wm_mean),
            (TissueClass.CSF, spec.csf_mean),
        ]:
            np.testing.assert_array_equal(vol.voxels[lv.labels == cls], mean)

    def test_intensity_ordering(self):
        """Test CSF < GM < WM in the mean observed intensity."""
        vol, lv = generate_phantom(PhantomSpec(dims=(64, 64, 4), seed=1))
        means = [vol.voxels[lv.labels == c].mean() for c in (3, 1, 2)]
        assert means[0] < means[1] < means[2]

    def test_tissue_fractions(self):
        """Test GM, WM and CSF shares close to the generating geometry."""
        _, lv = generate_phantom(PhantomSpec(dims=(64, 64, 16), seed=0))
        gm, wm, csf = tissue_fractions(lv)

        assert gm + wm + csf == pytest.approx(1.0)
        assert 0.45 < gm < 0.65
        assert 0.25 < wm < 0.45
        assert 0.05 < csf < 0.18

    def test_single_slice(self):
        """Test that a one-slice phantom is valid."""
        vol, lv = generate_phantom(PhantomSpec(dims=(48, 48, 1), seed=2))
        assert vol.dims == (48, 48, 1)
        assert lv.labels.max() == 3

    def test_spec_validation(self):
        """Test in-plane size and tissue ordering checks."""
        with pytest.raises(ValueError, match=">= 48"):
            PhantomSpec(dims=(32, 64, 4))
        with pytest.raises(ValueError, match="CSF < GM < WM"):
            PhantomSpec(csf_mean=700.0)
