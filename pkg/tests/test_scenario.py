import numpy as np
import pytest

from satkit import scenario as sc


def make_scenario(n_beams=19, n_u=2, seed=0, **kw):
    return sc.default_scenario(n_beams, n_u, seed=seed, **kw)


class TestScenarioValidation:
    def test_rejects_nonpositive_constants(self):
        with pytest.raises(sc.ConfigurationError):
            sc.Scenario(K=2, N=2, N_u=1, beam_centers=np.zeros((2, 2)),
                        bandwidth_hz=-1.0)

    def test_rejects_bad_reuse_factor(self):
        with pytest.raises(sc.ConfigurationError):
            sc.Scenario(K=1, N=1, N_u=1, beam_centers=np.zeros((1, 2)),
                        reuse_factor=5)

    def test_rejects_shape_mismatch(self):
        with pytest.raises(sc.ConfigurationError):
            sc.Scenario(K=3, N=3, N_u=1, beam_centers=np.zeros((2, 2)))

    def test_wavelength(self):
        scn = make_scenario()
        assert scn.wavelength_m == pytest.approx(
            sc.SPEED_OF_LIGHT / scn.carrier_freq_hz)


class TestBeamGain:
    def test_boresight_maximum(self):
        scn = make_scenario()
        g = sc.beam_gain(scn, 0, scn.feed_centers[0])
        assert g == pytest.approx(scn.boresight_gain)
        assert g.imag == 0.0

    def test_3db_point(self):
        # at the 3 dB off-axis angle, |a|^2 = a_max^2 / 2
        scn = make_scenario()
        pos = scn.feed_centers[0] + [scn.beam_radius_km, 0.0]
        g = sc.beam_gain(scn, 0, pos)
        assert abs(g) ** 2 == pytest.approx(scn.boresight_gain ** 2 / 2,
                                            rel=1e-9)

    def test_monotone_to_first_null(self):
        scn = make_scenario()
        null_km = sc.first_null_u() / sc._U_3DB * scn.beam_radius_km
        radii = np.linspace(0.0, 0.999 * null_km, 100)
        amps = [abs(sc.beam_gain(scn, 0, scn.feed_centers[0] + [r, 0]))
                for r in radii]
        floor = scn.boresight_gain * 10 ** (scn.sidelobe_floor_db / 20)
        # strictly decreasing until the sidelobe floor clamps, then flat
        assert all(a1 >= a2 for a1, a2 in zip(amps, amps[1:]))
        assert all(a1 > a2 or a1 <= floor
                   for a1, a2 in zip(amps, amps[1:]))

    def test_sidelobe_floor(self):
        scn = make_scenario()
        far = scn.feed_centers[0] + [40 * scn.beam_radius_km, 0.0]
        g = sc.beam_gain(scn, 0, far)
        floor = scn.boresight_gain * 10 ** (scn.sidelobe_floor_db / 20)
        assert abs(g) >= floor


class TestUsersAndChannel:
    def test_draw_users_inside_footprint(self):
        scn = make_scenario()
        users = sc.draw_users(scn, np.random.default_rng(0))
        assert users.positions.shape == (scn.K, scn.N_u, 2)
        d = np.linalg.norm(users.positions - scn.beam_centers[:, None, :],
                           axis=2)
        assert (d <= scn.beam_radius_km).all()
        assert users.beam_of_user(scn.N_u) == 1

    def test_unit_substitution_entry_magnitude(self):
        # all link constants 1 and slant distance = wavelength -> |h| = 1/(4 pi)
        lam = sc.SPEED_OF_LIGHT / 20e9
        scn = sc.Scenario(K=1, N=1, N_u=1, beam_centers=np.zeros((1, 2)),
                          sat_altitude_km=lam / 1e3, rx_gain=1.0,
                          noise_temp_k=1.0, bandwidth_hz=1.0, boltzmann=1.0,
                          boresight_gain=1.0)
        users = sc.UserSet(positions=np.zeros((1, 1, 2)))
        ch = sc.build_channel(scn, users,
                              gain_table=np.ones((1, 1), complex))
        assert abs(ch.Hbar[0, 0, 0]) == pytest.approx(1 / (4 * np.pi), rel=1e-12)

    def test_identity_fading_keeps_hbar(self):
        scn = make_scenario()
        rng = np.random.default_rng(1)
        ch = sc.build_channel(scn, sc.draw_users(scn, rng),
                              fading=sc.FadingModel(sigma_db=0.0), rng=rng)
        # sigma 0 leaves unit amplitude but a random phase per row
        np.testing.assert_allclose(np.abs(ch.fading), 1.0, atol=1e-12)

    def test_rank_one_row_fading(self):
        scn = make_scenario(n_beams=7)
        rng = np.random.default_rng(2)
        ch = sc.build_channel(scn, sc.draw_users(scn, rng),
                              fading=sc.FadingModel(sigma_db=3.0), rng=rng)
        ratio = ch.H / ch.Hbar
        for i in range(scn.N_u):
            for k in range(scn.K):
                np.testing.assert_allclose(ratio[i, k], ratio[i, k, 0],
                                           rtol=1e-12)

    def test_determinism(self):
        scn = make_scenario()
        a = sc.build_channel(scn, sc.draw_users(scn, np.random.default_rng(5)),
                             rng=np.random.default_rng(7))
        b = sc.build_channel(scn, sc.draw_users(scn, np.random.default_rng(5)),
                             rng=np.random.default_rng(7))
        np.testing.assert_array_equal(a.H, b.H)

    def test_path_loss_halves_with_double_distance(self):
        base = dict(K=1, N=1, N_u=1, beam_centers=np.zeros((1, 2)))
        users = sc.UserSet(positions=np.zeros((1, 1, 2)))
        g = np.ones((1, 1), complex)
        h1 = sc.build_channel(sc.Scenario(sat_altitude_km=1000.0, **base),
                              users, gain_table=g).Hbar[0, 0, 0]
        h2 = sc.build_channel(sc.Scenario(sat_altitude_km=2000.0, **base),
                              users, gain_table=g).Hbar[0, 0, 0]
        assert abs(h1) == pytest.approx(2 * abs(h2), rel=1e-12)

    def test_dimension_mismatch_rejected(self):
        scn = make_scenario()
        bad = sc.UserSet(positions=np.zeros((scn.K, scn.N_u + 1, 2)))
        with pytest.raises(sc.ConfigurationError):
            sc.build_channel(scn, bad)


class TestReuseAndCir:
    def test_reuse_colors_counts(self):
        scn = make_scenario(n_beams=37)
        for fr in (1, 2, 3, 4):
            colors = sc.reuse_colors(scn, fr)
            assert len(np.unique(colors)) == fr

    def test_adjacent_beams_differ_for_fr4(self):
        scn = make_scenario(n_beams=37)
        colors = sc.reuse_colors(scn, 4)
        centers = scn.beam_centers
        spacing = 2 * scn.beam_radius_km
        for k in range(scn.K):
            d = np.linalg.norm(centers - centers[k], axis=1)
            neighbours = np.nonzero((d > 0) & (d < 1.1 * spacing))[0]
            assert all(colors[n] != colors[k] for n in neighbours)

    def test_single_beam_no_interferers(self):
        scn = sc.Scenario(K=1, N=1, N_u=1, beam_centers=np.zeros((1, 2)),
                          hex_coords=np.zeros((1, 2), int))
        assert sc.average_cir(scn, 1) == np.inf

    def test_cir_increases_with_reuse(self):
        scn = make_scenario(n_beams=37)
        vals = [sc.average_cir(scn, fr, n_mc=150,
                               rng=np.random.default_rng(fr))
                for fr in (1, 2, 3, 4)]
        assert vals == sorted(vals)

    def test_explicit_pattern_accepted(self):
        scn = make_scenario(n_beams=7)
        colors = sc.reuse_colors(scn, 2)
        a = sc.average_cir(scn, colors, n_mc=50, rng=np.random.default_rng(0))
        b = sc.average_cir(scn, 2, n_mc=50, rng=np.random.default_rng(0))
        assert a == b


class TestGainTable:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "gains.csv"
        path.write_text("feed,user,amp,phase_rad\n"
                        "0,0,2.0,0.0\n0,1,1.0,1.5707963267948966\n"
                        "1,0,0.5,3.141592653589793\n1,1,1.0,0.0\n")
        table = sc.load_gain_table(path, 2, 2)
        assert table[0, 0] == pytest.approx(2.0)
        assert table[1, 0] == pytest.approx(1j, abs=1e-12)

    def test_incomplete_table_rejected(self, tmp_path):
        path = tmp_path / "gains.csv"
        path.write_text("feed,user,amp,phase_rad\n0,0,1.0,0.0\n")
        with pytest.raises(sc.ConfigurationError):
            sc.load_gain_table(path, 2, 1)
