"""Learn the observer's labeling scheme with a linear-chain CRF.

Generates labeled FF plans, trains a CRF on their per-step features and
compares decoded labels and predicted measures with the ground truth on
fresh plans.

    python demos/02_learn_the_observer.py
"""

import numpy as np

from explicable import labels as L
from explicable.crf import TrainConfig, train
from explicable.expd import predict_measures
from explicable.rover import RoverConfig, gen_problem, gen_dataset, ground_truth_label, record_dataset
from explicable.search import ehc_plan


def main():
    cfg = RoverConfig(max_hidden=3)
    records = gen_dataset(cfg, 100, seed=1)
    model = train(record_dataset(records), TrainConfig(max_iterations=200))
    meta = model.metadata
    print(f"trained on {len(records)} plans: {len(model.labels)} composite labels, "
          f"{len(model.features)} features, {meta['iterations']} iterations")

    truth, pred, hits, total = [], [], 0, 0
    for i in range(30):
        inst = gen_problem(cfg, f"demo-test-{i}")
        plan = ehc_plan(inst.full_task)
        gold = ground_truth_label(inst, plan)
        pm = predict_measures(model, inst.full_task, plan)
        truth.append(L.measure(gold))
        pred.append(pm)
        hits += sum(bool(a.current) == bool(b.current) for a, b in zip(gold.labels[1:], pm.labels[1:]))
        total += len(plan)

    mt, mp = np.mean([m.theta for m in truth]), np.mean([m.theta_hat for m in pred])
    bt, bp = np.mean([m.beta for m in truth]), np.mean([m.beta_hat for m in pred])
    print(f"mean theta: true {mt:.3f}, predicted {mp:.3f} (ratio {mp / mt:.2f})")
    print(f"mean beta:  true {bt:.3f}, predicted {bp:.3f} (ratio {bp / bt:.2f})")
    print(f"explicable/inexplicable agreement per step: {hits / total:.2f}")


if __name__ == "__main__":
    main()
