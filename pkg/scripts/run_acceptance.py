"""
Прогон приёмочных сценариев через CLI.
Запуск: из корня проекта
  python -m scripts.run_acceptance [каталог для артефактов]

Для каждого сценария печатается [OK] или [MISS] и время выполнения.
"""

import logging
import os
import sys
import time

# Добавляем корень проекта в path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.main import build_dispatcher, run

MODELS = os.path.join(os.path.dirname(os.path.abspath(__file__)), "models")


def _model(name: str) -> str:
    return os.path.join(MODELS, name)


def _result(report, *keys):
    value = report.result
    for k in keys:
        value = value[k]
    return value


# (название, argv, ожидаемый код выхода, дополнительная проверка отчёта)
SCENARIOS = [
    ("fam_bin: count достаточна",
     ["check-sufficiency", "--model", _model("fam_bin.json"), "--statistic", "count"], 0, None),
    ("fam_bin: parity не достаточна",
     ["check-sufficiency", "--model", _model("fam_bin.json"), "--statistic", "parity"], 1,
     lambda r: r.verdicts[0].evidence["cmi_bits"] > 0.05),
    ("fam_bin: минимальная статистика",
     ["minimal-stat", "--model", _model("fam_bin.json"), "--axis", "X"], 0,
     lambda r: _result(r, "partition") == "00|01,10|11"),
    ("fam_dep2: theorem1",
     ["theorem1", "--model", "fam_dep2", "--statistic", "identity@W", "--statistic", "count@X",
      "--statistic", "count@Y"], 0, None),
    ("fam_dep2: theorem1 с parity",
     ["theorem1", "--model", "fam_dep2", "--statistic", "identity@W", "--statistic", "parity@X",
      "--statistic", "count@Y"], 1,
     lambda r: _result(r, "theorem1", "cmi_bits") > 1e-3),
    ("треугольник: минимальная условно достаточная",
     ["minimal-conditional-stat", "--model", "triangle_max", "--axis", "X", "--given", "Y"], 0, None),
    ("ab_pair: угловая точка",
     ["corner-point", "--model", _model("ab_pair.json"), "--budget", "200"], 0,
     lambda r: abs(_result(r, "corner_point_bits") - 1.0) <= 1e-9),
    ("ab_pair: theorem6",
     ["theorem6", "--model", _model("ab_pair.json"), "--statistic", "first_bit", "--budget", "20"], 0, None),
    ("binary_remote: R(D) = 1 − h2(D)",
     ["rd-curve", "--model", "binary_remote", "--dgrid", "0.05:0.2:4"], 0, None),
    ("remote_zn: R(D) = R'(D)",
     ["rd-equality", "--model", _model("remote_zn.json"), "--statistic", "z_component"], 0, None),
    ("remote_zn: недостаточная t отвергается",
     ["rd-equality", "--model", _model("remote_zn.json"), "--statistic", "noise_component"], 1, None),
    ("гауссовский пример",
     ["sim-gaussian", "--trials", "100000"], 0, None),
    ("QAM в замираниях",
     ["sim-qam", "--trials", "10000"], 0, None),
    ("треугольная плотность",
     ["example-triangle"], 0, None),
    ("selftest",
     ["selftest"], 0, None),
]


def main():
    logging.basicConfig(level=logging.WARNING, format="%(asctime)s [%(levelname)s] %(name)s: %(message)s")
    out_dir = sys.argv[1] if len(sys.argv) > 1 else None
    dp = build_dispatcher()
    hits = 0
    for title, argv, expected, extra in SCENARIOS:
        if out_dir:
            argv = argv + ["--out", os.path.join(out_dir, argv[0])]
        started = time.perf_counter()
        report = run(argv, dp)
        elapsed = time.perf_counter() - started
        ok = report.exit_code == expected and (extra is None or extra(report))
        hits += ok
        print(f"[{'OK' if ok else 'MISS'}] {title} (exit {report.exit_code}, {elapsed:.1f} с)")
    print(f"Итог: {hits}/{len(SCENARIOS)} сценариев")
    return 0 if hits == len(SCENARIOS) else 1


if __name__ == "__main__":
    sys.exit(main())
