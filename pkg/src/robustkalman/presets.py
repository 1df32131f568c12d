"""Built-in model presets.

Benchmark models:
  sima  - 1-d time-invariant steady-state model, every hyper-parameter 1
  simb  - 3-d tracking model whose observation matrix has a non-trivial
          kernel (coordinate 2 is invisible at filtering time)

Stylized models:
  rw2d  - 2-d model with a random-walk first coordinate and white-noise second
  ar2   - AR(2) process in companion form, observed in the first coordinate

Vehicle-slope models (altitude/pitch tracking on synthetic channel data):
  m1    - linear time-invariant, state (altitude, vertical speed, compound
          increment)
  m2    - linear time-varying, the measured vehicle speed enters the
          transition matrix
  m3    - quadratic time-invariant (altitude increment = dt * speed * pitch),
          a genuinely nonlinear model for the extended filter
"""

import numpy as np

from .errors import ConfigError
from .models import LinearSSM, NonlinearSSM
from .rng import rng_at

PRESET_NAMES = ("sima", "simb", "rw2d", "ar2", "m1", "m2", "m3")


def synthetic_vehicle_channels(T=200, dt=1.0, seed=0):
    """Plausible speed / pitch-rate / altitude channels for the m* presets.

    Smooth seasonal speed around 22 m/s with AR(1) wiggle, a slowly varying
    pitch rate, and the altitude integrated from speed * pitch.  Deterministic
    given the seed.
    """
    rng = rng_at(seed, 9)
    t = np.arange(1, T + 1, dtype=float) * dt
    wiggle = np.empty(T)
    acc = 0.0
    for i in range(T):
        acc = 0.9 * acc + 0.5 * rng.standard_normal()
        wiggle[i] = acc
    speed = np.maximum(22.0 + 6.0 * np.sin(2 * np.pi * t / (150.0 * dt)) + wiggle, 3.0)
    pitch_rate = 0.02 * np.sin(2 * np.pi * t / (90.0 * dt)) \
        + 0.005 * rng.standard_normal(T)
    pitch = np.cumsum(pitch_rate) * dt
    altitude = 500.0 + np.cumsum(speed * pitch) * dt
    return {"time": t, "speed": speed, "pitch_rate": pitch_rate,
            "altitude": altitude, "dt": dt}


def _sima():
    return LinearSSM(F=[[1.0]], Z=[[1.0]], Q=[[1.0]], V=[[1.0]],
                     a0=[1.0], Q0=[[1.0]], preset=("sima", {}))


def _simb():
    F = np.array([[1.0, 1.0, 0.0],
                  [0.0, 1.0, 1.0],
                  [0.0, 0.0, 0.0]])
    Z = np.array([[1.0, 0.0, 0.0],
                  [0.0, 0.0, 1.0]])
    return LinearSSM(F=F, Z=Z, Q=np.diag([0.0, 0.0, 0.001]),
                     V=np.diag([0.1, 0.001]), a0=np.zeros(3),
                     Q0=np.diag([1.0, 0.1, 0.001]), preset=("simb", {}))


def _rw2d():
    F = np.array([[1.0, 1.0],
                  [0.0, 0.0]])
    Z = np.array([[0.3, 1.0],
                  [-0.3, 1.0]])
    return LinearSSM(F=F, Z=Z, Q=np.diag([0.0, 9.0]), V=np.diag([9.0, 9.0]),
                     a0=[20.0, 0.0], Q0=np.zeros((2, 2)), preset=("rw2d", {}))


def _ar2():
    F = np.array([[1.0, -0.9],
                  [1.0, 0.0]])
    Z = np.array([[1.0, 0.0]])
    return LinearSSM(F=F, Z=Z, Q=np.diag([1.0, 0.0]), V=[[1.0]],
                     a0=[0.0, 0.0], Q0=np.zeros((2, 2)), preset=("ar2", {}))


def _m1(T, seed, dt):
    ch = synthetic_vehicle_channels(T, dt, seed)
    F = np.array([[1.0, 1.0, 0.0],
                  [0.0, 1.0, 1.0],
                  [0.0, 0.0, 0.0]])
    Z = np.array([[1.0, 0.0, 0.0],
                  [0.0, 0.0, 1.0]])
    return LinearSSM(F=F, Z=Z, Q=np.diag([0.0, 0.0, 0.01]),
                     V=np.diag([5.0, 0.01]),
                     a0=[ch["altitude"][0], 0.0, 0.0],
                     Q0=np.diag([5.0, 1.0, 0.01]),
                     preset=("m1", {"T": T, "seed": seed, "dt": dt}))


def _m2(T, seed, dt):
    ch = synthetic_vehicle_channels(T, dt, seed)
    speed = ch["speed"]

    def F(t, _sp=speed, _dt=dt):
        sp = _sp[min(max(t, 1), len(_sp)) - 1]
        return np.array([[1.0, sp * _dt, 0.0],
                         [0.0, 1.0, _dt],
                         [0.0, 0.0, 0.0]])

    Z = np.array([[1.0, 0.0, 0.0],
                  [0.0, 0.0, 1.0]])
    return LinearSSM(F=F, Z=Z, Q=np.diag([0.0, 0.0, 0.05]),
                     V=np.diag([5.0, 0.005]),
                     a0=[ch["altitude"][0], 0.0, 0.0],
                     Q0=np.diag([5.0, 0.005, 0.005]),
                     p=3, q=2, preset=("m2", {"T": T, "seed": seed, "dt": dt}))


def quadratic_transition(dt):
    """(A, B) of the m3 dynamics  f(x) = A (x kron x) + B x + v.

    A is 5 x 25, laid out as column blocks A = (A^1 | ... | A^5) so that
    A (x kron x) = sum_l A^l x_l x; only block A^2 is nonzero and it feeds
    dt * speed * pitch into the altitude coordinate.
    """
    A = np.zeros((5, 25))
    A[0, 5 + 3] = dt   # block l=2, column 4: x_2 * x_4 = speed * pitch
    B = np.array([[1.0, 0.0, 0.0, 0.0, 0.0],
                  [0.0, 1.0, dt, 0.0, 0.0],
                  [0.0, 0.0, 0.0, 0.0, 0.0],
                  [0.0, 0.0, 0.0, 1.0, dt],
                  [0.0, 0.0, 0.0, 0.0, 0.0]])
    return A, B


def _m3(T, seed, dt):
    ch = synthetic_vehicle_channels(T, dt, seed)
    A, B = quadratic_transition(dt)
    p = 5
    Z = np.array([[1.0, 0.0, 0.0, 0.0, 0.0],
                  [0.0, 1.0, 0.0, 0.0, 0.0],
                  [0.0, 0.0, 1.0, 0.0, 0.0],
                  [0.0, 0.0, 0.0, 0.0, 1.0]])

    def f(t, x, u, v):
        return A @ np.kron(x, x) + B @ x + v

    def jac_f_x(t, x, u, v):
        # d/dx sum_l A^l x_l x  =  sum_l (x_l A^l + A^l x e_l')
        jac = B.copy()
        for l in range(p):
            Al = A[:, l * p:(l + 1) * p]
            jac += x[l] * Al
            jac[:, l] += Al @ x
        return jac

    def z(t, x, w, e):
        return Z @ x + e

    return NonlinearSSM(
        f, z, Q=np.diag([0.0, 0.0, 2.0, 0.0, 0.005]),
        V=np.diag([5.0, 2.0, 2.0, 0.005]),
        a0=[ch["altitude"][0], ch["speed"][0], 0.0, 0.0, 0.0],
        Q0=np.diag([5.0, 2.0, 2.0, 0.005, 0.005]),
        p=5, q=4,
        jac_f_x=jac_f_x,
        jac_f_v=lambda t, x, u, v: np.eye(5),
        jac_z_x=lambda t, x, w, e: Z,
        jac_z_e=lambda t, x, w, e: np.eye(4),
        preset=("m3", {"T": T, "seed": seed, "dt": dt}))


def build_preset(name, T=200, seed=0, dt=1.0):
    """Construct a built-in model by name; see the module docstring for the list.

    T, seed and dt only matter for the vehicle-slope presets, whose
    hyper-parameters depend on the synthetic channel data.
    """
    key = str(name).lower()
    if key == "sima":
        return _sima()
    if key == "simb":
        return _simb()
    if key == "rw2d":
        return _rw2d()
    if key == "ar2":
        return _ar2()
    if key == "m1":
        return _m1(T, seed, dt)
    if key == "m2":
        return _m2(T, seed, dt)
    if key == "m3":
        return _m3(T, seed, dt)
    raise ConfigError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
