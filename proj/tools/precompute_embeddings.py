#!/usr/bin/env python3
"""Write precomputed-embedding JSONL for mgtaudit from a local Hugging Face encoder.

Token mode emits the last hidden state per model token with special tokens
dropped. Pooled mode emits the attention-masked mean of the same states.
Texts longer than the model's maximum length are truncated and marked.
"""
import argparse
import json
import sys

import torch
from transformers import AutoModel, AutoTokenizer


def read_jsonl(path):
    with open(path, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dataset", required=True, help="corpus JSONL (id, text, label)")
    ap.add_argument("--model", required=True, help="local model directory or cached hub id")
    ap.add_argument("--model-id", help="id written into records (default: --model)")
    ap.add_argument("--mode", choices=["tokens", "pooled"], required=True)
    ap.add_argument("--modified", action="append", default=[],
                    help="output of `mgtaudit perturb`; rows are keyed <id>#<kind>")
    ap.add_argument("--out", required=True)
    ap.add_argument("--batch-size", type=int, default=8)
    ap.add_argument("--max-length", type=int, default=512)
    args = ap.parse_args()

    tokenizer = AutoTokenizer.from_pretrained(args.model)
    model = AutoModel.from_pretrained(args.model).eval()
    model_id = args.model_id or args.model

    items = [(d["id"], d["text"]) for d in read_jsonl(args.dataset)]
    for path in args.modified:
        items += [(f'{m["id"]}#{m["kind"]}', m["modified_text"]) for m in read_jsonl(path)]

    written = 0
    with open(args.out, "w", encoding="utf-8") as out, torch.no_grad():
        for start in range(0, len(items), args.batch_size):
            batch = items[start:start + args.batch_size]
            texts = [t for _, t in batch]
            full = tokenizer(texts, add_special_tokens=True)["input_ids"]
            enc = tokenizer(texts, padding=True, truncation=True, max_length=args.max_length,
                            return_tensors="pt", return_special_tokens_mask=True)
            special = enc.pop("special_tokens_mask")
            hidden = model(**enc).last_hidden_state
            for i, (key, _) in enumerate(batch):
                keep = (enc["attention_mask"][i] == 1) & (special[i] == 0)
                rows = hidden[i][keep]
                if rows.shape[0] == 0:
                    print(f"skipping {key}: no non-special tokens", file=sys.stderr)
                    continue
                vectors = rows if args.mode == "tokens" else rows.mean(dim=0, keepdim=True)
                record = {
                    "id": key,
                    "model": model_id,
                    "mode": args.mode,
                    "vectors": vectors.tolist(),
                    "truncated": len(full[i]) > args.max_length,
                }
                out.write(json.dumps(record) + "\n")
                written += 1
    print(f"wrote {written} records to {args.out}", file=sys.stderr)


if __name__ == "__main__":
    main()
