"""Inside the screening stage: reference stats, bands, and verdicts.

Builds a three-blob scene, extracts the high-gradient reference
population, prints the derived acceptance bands, then runs the full
pipeline and dumps every region verdict so the kept/rejected split is
visible.
"""

from collections import Counter

from thermoseg.config import PipelineConfig
from thermoseg.discrimination import reference_stats, segment
from thermoseg.smoothing import gradient_magnitude
from thermoseg.synth import Background, BlobSpec, SceneSpec, generate_scene

SCENE = SceneSpec(
    width=120, height=100,
    background=Background("ramp", base=19.0, grad_row=0.02, grad_col=0.015),
    blobs=(BlobSpec(30.0, 30.0, 9.0, 1.4), BlobSpec(70.0, 60.0, 11.0, 2.4),
           BlobSpec(30.0, 95.0, 8.0, 1.9, "plateau")),
    noise_std=0.05, seed=8,
)


def main():
    raster, _ = generate_scene(SCENE)
    cfg = PipelineConfig.defaults()

    g_s = gradient_magnitude(raster, cfg.diffusion.sigma)
    stats, d_g = reference_stats(g_s, cfg.ref)
    lo, hi = cfg.bands.mean_band(stats)
    cv_lo, cv_hi = cfg.bands.cv_band(stats)
    print(f"reference population: {d_g.area} px of steep gradient")
    print(f"  m_grad={stats.m_grad:.4f}  delta_std={stats.delta_std:.4f}  "
          f"v_var={stats.v_var:.4f}")
    print(f"  mean band [{lo:.4f}, {hi:.4f}]  cv band [{cv_lo:.4f}, {cv_hi:.4f}]")
    print()

    mask, report = segment(raster, cfg)
    print(f"segment kept {mask.area} px, stop: {report.stop_cause}")
    print(f"verdicts: {dict(Counter(d.reason for d in report.decisions))}")
    print()
    print(f"  {'step':>4} {'region':>6} {'area':>5} {'bnd mean':>9} {'bnd cv':>7} verdict")
    for step, decision in zip(report.decision_steps, report.decisions):
        print(f"  {step:>4} {decision.region_id:>6} {decision.area:>5} "
              f"{decision.boundary_mean:>9.4f} {decision.boundary_cv:>7.4f} "
              f"{decision.reason}")


if __name__ == "__main__":
    main()
