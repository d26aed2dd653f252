"""Grid convergence of both models on the manufactured solutions.

    python3 demos/mms_convergence.py
"""
from sbdflow.grid import Model
from sbdflow.verification import convergence_study

for model, levels in ((Model.FULL, [20, 40, 80, 160]), (Model.REDUCED, [16, 32, 64, 128])):
    rep = convergence_study(model, levels)
    print(f"{model.value} model, h = " + ", ".join(f"1/{n}" for n in levels))
    for name, errs in rep.errors.items():
        print(f"  {name:6s} " + " ".join(f"{e:9.3e}" for e in errs) + f"   slope {rep.slopes[name]:.3f}")
