"""Smoke test for the fxarb Python bindings."""

import math
import tempfile
from pathlib import Path

import fxarb


def main():
    config = fxarb.SimulationConfig(steps=5000, seed=7)
    runs = fxarb.run(config)
    assert runs.steps == 5000
    mids = runs.mid_series("USDJPY")
    assert len(mids) == 5000 and all(m > 0 for m in mids)
    assert len(runs.config_timeline()) == 5000

    again = fxarb.run(config)
    assert again.mid_series("EURJPY") == runs.mid_series("EURJPY")

    stats = runs.config_stats()
    assert abs(sum(stats["appearance_probability"].values()) - 1.0) < 1e-9

    curves = runs.correlations([0.1, 1.0])
    assert set(curves) == {"USDJPY-EURUSD", "EURUSD-EURJPY", "USDJPY-EURJPY"}

    mu1 = fxarb.mu_one(1.2505, 110.05, 137.50)
    assert math.isclose(mu1, 1.2505 * 110.05 / 137.50)
    assert fxarb.detect(1.01, 0.99) == "I"
    assert fxarb.detect(0.99, 0.99) is None

    try:
        fxarb.SimulationConfig(steps=10, seed=1, makers=(1, 35, 25))
    except ValueError as e:
        print("rejected bad config:", e)
    else:
        raise AssertionError("invalid maker count accepted")

    ensemble = fxarb.run_ensemble(fxarb.SimulationConfig(steps=2000, seed=0), [1, 2])
    assert [r.seed for r in ensemble] == [1, 2]

    with tempfile.TemporaryDirectory() as d:
        runs.export(d, [0.1, 1.0])
        assert (Path(d) / "mid_series.csv").exists()

    print("smoke test passed")


if __name__ == "__main__":
    main()
