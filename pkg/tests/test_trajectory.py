import numpy as np
import pytest

from mbdnode.trajectory import Trajectory


def make_traj(n=5, width=4, n_u=0, seed=0):
    rng = np.random.default_rng(seed)
    inputs = rng.normal(size=(n, n_u)) if n_u else None
    return Trajectory(0.01 * np.arange(n + 1),
                      rng.normal(size=(n + 1, width)), inputs)


class TestValidation:
    def test_row_mismatch(self):
        with pytest.raises(ValueError):
            Trajectory(np.arange(3.0), np.zeros((4, 2)))

    def test_odd_width(self):
        with pytest.raises(ValueError):
            Trajectory(np.arange(2.0), np.zeros((2, 3)))

    def test_input_rows(self):
        with pytest.raises(ValueError):
            Trajectory(np.arange(3.0), np.zeros((3, 2)), np.zeros((3, 1)))

    def test_nonuniform_grid(self):
        with pytest.raises(ValueError):
            Trajectory(np.array([0.0, 0.1, 0.3]), np.zeros((3, 2)))

    def test_dt(self):
        assert make_traj().dt == pytest.approx(0.01)


class TestCsv:
    @pytest.mark.parametrize("n_u", [0, 2])
    def test_value_exact_roundtrip(self, n_u):
        traj = make_traj(n=7, width=4, n_u=n_u, seed=3)
        back = Trajectory.from_csv(traj.to_csv())
        assert back.states.tobytes() == traj.states.tobytes()
        assert back.times.tobytes() == traj.times.tobytes()
        if n_u:
            assert back.inputs.tobytes() == traj.inputs.tobytes()
        else:
            assert back.inputs is None

    def test_byte_identical_rewrite(self, tmp_path):
        traj = make_traj(n=4, width=2, n_u=1, seed=9)
        p1 = tmp_path / "a.csv"
        traj.save_csv(p1)
        back = Trajectory.load_csv(p1)
        p2 = tmp_path / "b.csv"
        back.save_csv(p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_header_names(self):
        text = make_traj(n=1, width=4, n_u=1).to_csv()
        assert text.split("\n")[0] == "t,z1,z2,v1,v2,u1"

    def test_single_state_roundtrip(self):
        traj = Trajectory(np.array([0.0]), np.array([[1.0, 2.0]]))
        back = Trajectory.from_csv(traj.to_csv())
        assert np.array_equal(back.states, traj.states)
