# Dual-mode import shim: works as module (-m rmexit.demo_sweep)
# and as a direct script (python rmexit/demo_sweep.py)
if __package__ is None or __package__ == "":
    import sys, pathlib
    sys.path.append(str(pathlib.Path(__file__).resolve().parents[1]))
    from rmexit.schemas import RunConfig
    from rmexit.orchestrator import run_sweep
    from rmexit.settings import configure_logging
else:
    from .schemas import RunConfig
    from .orchestrator import run_sweep
    from .settings import configure_logging

def _run():
    config = RunConfig(
        codes=["rm:3,1", "rm:5,2", "rm:7,3"],
        eps_grid="0:1:33",
        trials=2000,
        seed=7,
        deltas=[0.1],
        out="runs/demo_sweep",
    )
    configure_logging("WARNING")
    result = run_sweep(config)
    print("ACTION LOG:", " | ".join(result.action_log))
    for entry in result.files:
        print(f"  {entry.path}  sha256={entry.sha256[:12]}")
    if result.failures:
        print("FAILURES:", "; ".join(result.failures))

if __name__ == "__main__":
    _run()
