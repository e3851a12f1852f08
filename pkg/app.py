from flask import Flask, request, jsonify
import argparse

from errors import CapacityError, ChandelierError, UsageError
from lattice import lattice_stats
from model import CouplingParams, PARAM_KEYS
from output_utils import round_floats
from phase import DEFAULT_ORBIT_STEPS, build_grid, orbit, scan
from roots import critical_temps, fixed_point_report

try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    pass  # python-dotenv not installed, that's okay

app = Flask(__name__)
API_MAX_SCAN_POINTS = 10_000  # Scans are computed inline, keep requests short
API_MAX_ORBIT_STEPS = 100_000


@app.errorhandler(ChandelierError)
def handle_chandelier_error(e):
    return jsonify({"error": str(e)}), 400


def params_from_request():
    return CouplingParams.from_mapping(request.args)


def int_arg(name, default):
    raw = request.args.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{name} must be an integer, got {raw!r}")


def float_arg(name):
    raw = request.args.get(name)
    if raw is None:
        raise UsageError(f"{name} is required")
    try:
        return float(raw)
    except ValueError:
        raise UsageError(f"{name} must be a number, got {raw!r}")


@app.route("/api/fixed-points", methods=["GET"])
def api_fixed_points():
    """Positive fixed points, all quartic roots, Descartes bounds and T*, T**."""
    report = fixed_point_report(params_from_request())
    return jsonify(round_floats(report.to_dict()))


@app.route("/api/critical-temps", methods=["GET"])
def api_critical_temps():
    params = params_from_request()
    temps = critical_temps(params)
    return jsonify(round_floats({
        **temps.to_dict(),
        "in_interval": temps.interval_contains(params.T),
    }))


@app.route("/api/orbit", methods=["GET"])
def api_orbit():
    params = params_from_request()
    x0 = float_arg("x0")
    steps = int_arg("steps", DEFAULT_ORBIT_STEPS)
    if steps > API_MAX_ORBIT_STEPS:
        raise CapacityError(f"steps capped at {API_MAX_ORBIT_STEPS} for the API")
    return jsonify(round_floats(orbit(params, x0, steps).to_dict()))


@app.route("/api/lattice", methods=["GET"])
def api_lattice():
    depth = int_arg("depth", 2)
    return jsonify(lattice_stats(depth))


@app.route("/api/phase-scan", methods=["GET"])
def api_phase_scan():
    """Grid axes given as J=a:b:n (or a single number) for each of J, Jp, Jsl, T."""
    missing = [k for k in PARAM_KEYS if k not in request.args]
    if missing:
        raise UsageError(f"Missing grid axis/axes: {', '.join(missing)}")
    grid = build_grid(*(request.args[k] for k in PARAM_KEYS))
    if len(grid) > API_MAX_SCAN_POINTS:
        raise CapacityError(f"grid of {len(grid)} points exceeds the API cap of {API_MAX_SCAN_POINTS}")
    cells = scan(grid)
    return jsonify({
        "total_cells": len(cells),
        "transition_cells": sum(1 for c in cells if c.transition),
        "cells": round_floats([c.to_dict() for c in cells]),
    })


# --- Main Application Execution ---
if __name__ == "__main__":
    parser = argparse.ArgumentParser(description='Run the chandelier model JSON API')
    parser.add_argument('--public', action='store_true',
                        help='Run on 0.0.0.0. For TESTING ON TRUSTED NETWORKS ONLY.')
    parser.add_argument('--port', type=int, default=5000)
    args = parser.parse_args()

    host_ip = '0.0.0.0' if args.public else '127.0.0.1'
    # debug must be False if potentially exposed
    current_debug_mode = not args.public

    print(f"Starting Flask server on http://{host_ip}:{args.port} (Debug mode: {current_debug_mode})")
    app.run(debug=current_debug_mode, host=host_ip, port=args.port)
