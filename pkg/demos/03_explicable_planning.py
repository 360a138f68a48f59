"""Use the learned model inside planning: FF-EXPD and plan selection.

FF-EXPD adds (w_theta (1 - theta_hat) + w_beta (1 - beta_hat)) times the
length of prefix plus relaxed plan to FF's heuristic. Selection ranks
candidate plans by predicted explicability. The ground-truth labeler scores
the outcome, and as an upper bound it also acts as the scorer itself.

    python demos/03_explicable_planning.py
"""

from explicable import labels as L
from explicable.crf import TrainConfig, train
from explicable.expd import ExpdWeights, ffexpd_plan, rand_index, select_index
from explicable.rover import (GroundTruthLabeler, RoverConfig, gen_dataset, gen_hidden_variant, gen_problem,
                              ground_truth_label, record_dataset)
from explicable.search import ehc_plan


def main():
    model = train(record_dataset(gen_dataset(RoverConfig(max_hidden=3), 100, seed=2)),
                  TrainConfig(max_iterations=200))

    print("FF vs FF-EXPD (theta mode) on instances with 4 to 6 hidden goals")
    for i in range(5):
        inst = gen_problem(RoverConfig(max_hidden=6, min_hidden=4), f"demo-syn-{i}")
        t = inst.full_task
        ff = ehc_plan(t)
        ex = ffexpd_plan(t, model, ExpdWeights(2.0, 0.0))
        a, b = L.measure(ground_truth_label(inst, ff)), L.measure(ground_truth_label(inst, ex))
        print(f"  instance {i}: FF {len(ff):2d} steps theta {a.theta:.2f} | "
              f"FF-EXPD {len(ex):2d} steps theta {b.theta:.2f}")

    print("\nSelecting one of 10 candidate plans for the same public goal")
    base = gen_problem(RoverConfig(max_hidden=0), "demo-select").problem
    cands = [gen_hidden_variant(base, 4, k) for k in range(10)]
    pairs = [(c.full_task, ehc_plan(c.full_task)) for c in cands]
    labeler = GroundTruthLabeler(base, cands[0].public_task)

    def oracle(task, plan):
        return L.measure(labeler.label(task, plan))
    truth = [oracle(t, p).theta for t, p in pairs]
    for name, k in (("model", select_index(pairs, model)), ("random", rand_index(len(pairs), 0)),
                    ("oracle", select_index(pairs, oracle))):
        print(f"  {name:<6} picks candidate {k}: true theta {truth[k]:.2f}")


if __name__ == "__main__":
    main()
