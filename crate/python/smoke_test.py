"""Smoke test for the Python bindings.

Build and install first:
    pip install --no-build-isolation ./crates/py
"""

import math

import awva


def main() -> None:
    omega0 = awva.thz_to_rad_per_fs(2400.0)
    delta = awva.thz_to_rad_per_fs(55.0)
    tau = awva.as_to_fs(8.0)

    s = awva.TimeDelayScenario(omega0, delta, tau, 0.03)
    shift = s.spectrum_shift()
    assert math.isclose(shift, -4.474e-3, rel_tol=1e-3), shift
    assert math.isclose(s.zero_shift_epsilon(), omega0 * tau)
    ratio = math.sqrt(s.max_information_tau() / s.swva_information_tau())
    assert math.isclose(ratio, 43.65, abs_tol=0.01), ratio

    model = s.measurement_model()
    assert math.isclose(model.post_mean() - omega0, shift, rel_tol=1e-8)
    accepted = model.sample(10_000_000, seed=5)
    p_d = model.postselect_probability()
    assert abs(len(accepted) - 1e7 * p_d) < 6 * math.sqrt(1e7 * p_d)

    pre, post = awva.states_for_weak_value(-66.66j)
    aw = awva.weak_value(pre, post)
    assert abs(aw - (-66.66j)) < 1e-9, aw

    trace = awva.run_adaptive(s, noise_free=True)
    assert trace.stop_reason == "sign-flip", trace
    assert abs(trace.epsilon_final - omega0 * tau) <= 2e-6
    assert math.isclose(trace.tau_hat, tau, rel_tol=1e-3)

    again = awva.run_adaptive(s, n_per_iteration=10**8, max_iterations=50, seed=9)
    assert again.iterations == awva.run_adaptive(
        s, n_per_iteration=10**8, max_iterations=50, seed=9
    ).iterations

    try:
        awva.TimeDelayScenario(omega0, delta, tau, 0.0)
    except awva.AwvaError as e:
        assert isinstance(e, ValueError)
    else:
        raise AssertionError("epsilon = 0 accepted")

    print(f"ok: shift {shift:.4e} rad/fs, {len(trace)} noise-free iterations")


if __name__ == "__main__":
    main()
