"""Regenerates mock_script.json: canned answers for every case, model and condition.

Answers are derived from the gold sets with a per-model, per-condition recall
profile, so mock runs produce varied but fully reproducible scores.
"""
import hashlib
import json
from pathlib import Path

HERE = Path(__file__).parent
MODELS = {
    # name: (base recall, gain from retrieval, gain from pre-diagnosis, distractor rate)
    "GPT-4o": (0.60, 0.10, 0.10, 0.30),
    "Mixtral-8x7b-32768": (0.55, 0.25, 0.05, 0.20),
    "Nemotron 70b instruct": (0.70, -0.05, 0.10, 0.35),
    "Qwen-Turbo": (0.65, 0.00, 0.05, 0.30),
    "Claude-3.5-Sonnet": (0.50, 0.05, 0.20, 0.25),
}
CONDITIONS = ["norag+noprediag", "rag+noprediag", "norag+prediag", "rag+prediag"]
DISTRACTORS_DX = ["osteoarthritis", "reactive arthritis", "fibromyalgia", "septic arthritis"]
DISTRACTORS_TX = ["sulfasalazine", "ibuprofen", "leflunomide", "azathioprine", "febuxostat"]
SURFACE = {
    "rheumatoid arthritis": "RA",
    "methotrexate": "MTX",
    "systemic lupus erythematosus": "SLE",
    "mycophenolate mofetil": "MMF",
    "giant cell arteritis": "Giant Cell Arteritis",
    "prednisolone": "Prednisone",
}


def unit(*parts):
    h = hashlib.sha256("|".join(parts).encode()).digest()
    return int.from_bytes(h[:8], "big") / 2**64


def pick(gold, pool, recall, noise, key):
    out = [t for t in gold if unit(key, "keep", t) < recall]
    out += [t for t in pool if unit(key, "add", t) < noise / len(pool) * 2]
    return out


def render(case, model, cond, dx, tx):
    key = f"{case['case_id']}|{model}|{cond}"
    style = unit(key, "style")
    spell = lambda t: SURFACE.get(t, t) if unit(key, "syn", t) < 0.5 else t.capitalize()
    reasoning = (
        f"Step 1: the history ({case['history'][:60]}...) and laboratory findings narrow the differential.\n"
        "Step 2: weigh the most likely diagnosis against its mimics.\n"
        "Step 3: choose guideline-based first-line therapy.\n"
    )
    if model == "Claude-3.5-Sonnet" and case["case_id"] == "case-10" and cond == "norag+noprediag":
        return reasoning + "I cannot give a confident answer without further information."
    if style < 0.1:
        bullets = "\n".join(f"* {spell(t)}" for t in dx)
        return reasoning + "\nMost likely:\n" + bullets + "\n"
    lines = [reasoning, "DIAGNOSES:"]
    lines += [f"- {spell(t)}" for t in dx]
    lines.append("TREATMENTS:")
    lines += [f"- {spell(t)}" for t in tx]
    return "\n".join(lines) + "\n"


def main():
    cases = json.loads((HERE / "cases.json").read_text())
    script = {}
    for case in cases:
        for model, (base, rag_gain, pre_gain, noise) in MODELS.items():
            for cond in CONDITIONS:
                recall = base + (rag_gain if cond.startswith("rag") else 0) + (pre_gain if cond.endswith("+prediag") else 0)
                key = f"{case['case_id']}|{model}|{cond}"
                dx = pick(case["gold_diagnoses"], DISTRACTORS_DX, recall + 0.2, noise, key + "dx")
                tx = pick(case["gold_treatments"], DISTRACTORS_TX, recall, noise, key + "tx")
                if not dx:
                    dx = [case["gold_diagnoses"][0]] if unit(key, "rescue") < recall else [DISTRACTORS_DX[0]]
                script[key] = render(case, model, cond, dx, tx)
    (HERE / "mock_script.json").write_text(json.dumps(script, indent=1, ensure_ascii=False, sort_keys=True) + "\n")
    print(f"{len(script)} entries")


if __name__ == "__main__":
    main()
