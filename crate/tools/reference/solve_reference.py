"""Reference objectives for the first-iteration surrogate subproblems.

Each instance is solved twice with CLARABEL through cvxpy:

* ``dump_objective``: the exported standard-form conic program, read
  directly from its JSON dump.
* ``direct_objective``: the same subproblem written from scratch with
  complex Hermitian covariance variables, the channels, the steering
  vectors and the expansion point, without looking at the encoding.

Usage:
    cargo test -p isac-ee-cli --test reference_instances -- --ignored
    python3 tools/reference/solve_reference.py
"""

import json
import math
import pathlib

import cvxpy as cp
import numpy as np

HERE = pathlib.Path(__file__).resolve().parent
INSTANCES = HERE / "instances.json"
OUTPUT = HERE.parent.parent / "crates" / "cli" / "tests" / "fixtures" / "subproblem_reference.json"

LOG2E = 1.0 / math.log(2.0)


def solve(problem):
    """Objective and status. CLARABEL sometimes stalls just short of its
    tolerances (about 1e-8 here) and reports the result as inaccurate; such
    results are kept and labelled."""
    problem.solve(solver=cp.CLARABEL, tol_gap_abs=1e-9, tol_gap_rel=1e-9, tol_feas=1e-9, max_iter=500)
    if problem.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        raise RuntimeError(f"reference solve ended with status {problem.status}")
    return problem.value, problem.status


def svec_matrix(x, offset, side):
    """Symmetric matrix whose scaled lower triangle is x[offset:]."""
    s = cp.Variable((side, side), symmetric=True)
    cons = []
    idx = offset
    for j in range(side):
        for i in range(j, side):
            scale = 1.0 if i == j else math.sqrt(2.0)
            cons.append(x[idx] == scale * s[i, j])
            idx += 1
    return s, cons


def solve_dump(dump):
    n = dump["num_vars"]
    x = cp.Variable(n)
    rows = dump["num_constraints"]
    a = np.zeros((rows, n))
    for r, c, v in dump["a"]:
        a[r, c] += v
    cons = [a @ x == np.array(dump["b"])]
    for cone in dump["cones"]:
        o = cone["offset"]
        kind = cone["type"]
        if kind == "nonneg":
            cons.append(x[o:o + cone["dim"]] >= 0)
        elif kind == "soc":
            cons.append(cp.SOC(x[o], x[o + 1:o + cone["dim"]]))
        elif kind == "rotated_soc":
            d = cone["dim"]
            lhs = cp.hstack([x[o] - x[o + 1], math.sqrt(2.0) * x[o + 2:o + d]])
            cons += [cp.SOC(x[o] + x[o + 1], lhs), x[o] >= 0, x[o + 1] >= 0]
        elif kind == "exp":
            cons.append(cp.ExpCone(x[o], x[o + 1], x[o + 2]))
        elif kind == "psd":
            s, link = svec_matrix(x, o, cone["side"])
            cons += link + [s >> 0]
        else:
            raise ValueError(f"unknown cone {kind}")
    c = np.array(dump["c"])
    if dump["sense"] == "maximize":
        problem = cp.Problem(cp.Maximize(c @ x), cons)
    else:
        problem = cp.Problem(cp.Minimize(c @ x), cons)
    return solve(problem)


def complex_vector(pairs):
    return np.array([re + 1j * im for re, im in pairs])


def complex_matrix(rows):
    return np.array([[re + 1j * im for re, im in row] for row in rows])


def solve_direct(inst):
    channels = [complex_vector(h) for h in inst["channels"]]
    steering = [complex_vector(a) for a in inst["steering"]]
    noise = inst["noise_power"]
    k_users = len(channels)
    n = len(channels[0])
    lam = inst["lambda"]
    expansion = [complex_matrix(inst["expansion_radar"])] + [complex_matrix(v) for v in inst["expansion_users"]]

    # Index 0 is the radar covariance, index k + 1 the covariance of user k.
    v = [cp.Variable((n, n), hermitian=True) for _ in range(k_users + 1)]
    t = cp.Variable()
    u = cp.Variable()

    def quad(h, m):
        return cp.real(h.conj() @ m @ h)

    cons = [m >> 0 for m in v]
    power = sum(cp.real(cp.trace(m)) for m in v)
    cons.append(u >= power / inst["amplifier_efficiency"] + inst["p_c"])
    cons.append(power <= inst["p_max"])

    rate_bound = 0
    for k, h in enumerate(channels):
        hn = h / math.sqrt(noise[k])
        interference = sum(quad(hn, v[i]) for i in range(k_users + 1) if i != k + 1) + 1.0
        useful = quad(hn, v[k + 1])
        cons.append(useful >= inst["sinr_thresholds"][k] * interference)
        at_point = sum(np.real(hn.conj() @ expansion[i] @ hn) for i in range(k_users + 1) if i != k + 1) + 1.0
        rate_bound += (
            cp.log(useful + interference) * LOG2E
            - math.log2(at_point)
            - LOG2E / at_point * (interference - at_point)
        )

    total = sum(v)
    for a, gamma in zip(steering, inst["beampattern_thresholds"]):
        cons.append(quad(a, total) >= gamma)

    cons.append(0.5 * lam * cp.square(t) + cp.square(u) / (2.0 * lam) <= rate_bound)
    return solve(cp.Problem(cp.Maximize(t), cons))


def reference(label, inst):
    dump = inst["conic"]
    from_dump, dump_status = solve_dump(dump)
    direct, direct_status = solve_direct(inst)
    print(f"{label}: dump {from_dump:.10e} ({dump_status})  direct {direct:.10e} ({direct_status})")
    return {
        "dump_objective": float(from_dump),
        "direct_objective": float(direct),
        "dump_status": dump_status,
        "direct_status": direct_status,
        "num_vars": dump["num_vars"],
        "num_constraints": dump["num_constraints"],
        "b_sum": float(sum(dump["b"])),
    }


def main():
    data = json.loads(INSTANCES.read_text())
    results = [reference(f"instance {i:2d}", inst) for i, inst in enumerate(data["instances"])]
    nominal = reference("nominal    ", data["nominal"])
    out = {"solver": f"cvxpy {cp.__version__} / CLARABEL", "instances": results, "nominal": nominal}
    OUTPUT.write_text(json.dumps(out, indent=2) + "\n")


if __name__ == "__main__":
    main()
