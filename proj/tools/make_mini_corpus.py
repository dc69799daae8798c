#!/usr/bin/env python3
# Copyright 2026 The revsum Authors
# SPDX-License-Identifier: Apache-2.0
"""Generates the bundled mini-corpus under data/mini (deterministic)."""

import csv
import json
import math
import random
import re
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data" / "mini"

APPS = {
    "rideshare": {
        "format": "jsonl",
        "count": 48,
        "topics": {
            "drivers": (["The drivers are friendly and professional.", "My driver was polite and knew the city well."],
                        ["Drivers keep canceling rides at the last minute.", "The driver was rude and took a longer route."]),
            "pricing": (["Fares are cheaper than taxis in my area.", "Prices stay fair even during rush hour."],
                        ["Surge pricing doubles the fare every weekend.", "Hidden fees show up after the ride ends."]),
            "waiting": (["Pickup times are short and the car arrives quickly.", "I rarely wait more than five minutes."],
                        ["Wait times have become very long lately.", "The estimated arrival time is never accurate."]),
            "support": (["Customer service refunded my charge within a day.", "Support answered my complaint politely."],
                        ["Customer service never replies to my messages.", "Getting a refund from support is impossible."]),
            "app": (["The app is smooth and easy to navigate.", "Booking a ride takes only a few taps."],
                    ["The app crashes when I try to pay.", "Location tracking freezes during the trip."]),
            "safety": (["Sharing my trip with family makes me feel safe.", "The safety features give me peace of mind."],
                       ["I felt unsafe because the car did not match the photo.", "There is no way to report unsafe driving quickly."]),
        },
    },
    "meditation": {
        "format": "csv",
        "count": 40,
        "topics": {
            "content": (["The guided meditations are calming and varied.", "Sleep stories help me fall asleep fast."],
                        ["The library repeats the same sessions over and over.", "New content is rarely added anymore."]),
            "subscription": (["The yearly subscription is worth the price.", "The free trial showed me everything I needed."],
                             ["The subscription renewed without any warning.", "Canceling the subscription is confusing and slow."]),
            "app": (["The app design is clean and peaceful.", "Offline downloads work well on flights."],
                    ["The app logs me out after every update.", "Audio stops playing when the screen locks."]),
            "progress": (["Tracking my streak keeps me motivated.", "Reminders help me build a daily habit."],
                         ["My streak history disappeared after the update.", "Reminders arrive at random hours."]),
            "voice": (["The narrator has a soothing voice.", "The teachers explain breathing techniques clearly."],
                      ["The narrator talks too fast for a relaxation session.", "Background music drowns out the voice."]),
        },
    },
}

TITLES = ["Great", "Okay", "Disappointed", "Love it", "Needs work", "Not bad"]
RATING_WEIGHTS = {1: 0.2, 2: 0.1, 3: 0.15, 4: 0.2, 5: 0.35}


def make_reviews(app, spec, rng):
    reviews = []
    ratings = []
    for r, w in RATING_WEIGHTS.items():
        ratings += [r] * round(w * spec["count"])
    while len(ratings) < spec["count"]:
        ratings.append(5)
    rng.shuffle(ratings)
    topics = list(spec["topics"].items())
    for i, rating in enumerate(ratings[: spec["count"]]):
        positive = rating >= 4
        mixed = rating == 3
        chosen = rng.sample(topics, k=rng.choice([1, 2, 2, 3]))
        sentences = []
        for j, (_, (pos, neg)) in enumerate(chosen):
            pool = pos if (positive or (mixed and j == 0)) else neg
            sentences.append(rng.choice(pool))
        if rng.random() < 0.15:
            sentences.append("See https://example.com/help for details.")
        if rng.random() < 0.1:
            sentences.append("Ok.")
        day = 1 + (i * 7) % 28
        month = 1 + (i * 5) % 12
        reviews.append({
            "id": f"{app[:2]}-{i + 1:03d}",
            "app_id": app,
            "rating": rating,
            "title": rng.choice(TITLES),
            "body": " ".join(sentences),
            "posted_at": f"2024-{month:02d}-{day:02d}",
            "likes": rng.randint(0, 40),
        })
    return reviews


def extras(app, n):
    """Records the ingest step must handle: a duplicate id, a Spanish review, a bad rating."""
    return [
        {"id": f"{app[:2]}-001", "app_id": app, "rating": 2, "title": "dup", "body": "Duplicate record of the first review.",
         "posted_at": "2024-02-02", "likes": 0},
        {"id": f"{app[:2]}-es1", "app_id": app, "rating": 5, "title": "Genial",
         "body": "La aplicación es excelente y muy fácil de usar, me encanta la música de fondo.", "posted_at": "2024-03-03",
         "likes": 1},
        {"id": f"{app[:2]}-bad", "app_id": app, "rating": 9, "title": "x", "body": "Rating out of range.",
         "posted_at": "2024-03-04", "likes": 0},
    ]


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


def write_csv(path, rows):
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.DictWriter(f, fieldnames=["id", "app_id", "rating", "title", "body", "posted_at", "likes"],
                           lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def embeddings(all_reviews, rng, dim=16):
    topic_words = {}
    for spec in APPS.values():
        for topic, (pos, neg) in spec["topics"].items():
            for s in pos + neg:
                for w in re.findall(r"[a-z]+", s.lower()):
                    topic_words.setdefault(w, topic)
    topics = sorted({t for t in topic_words.values()})
    bases = {t: [rng.gauss(0, 1) for _ in range(dim)] for t in topics}
    vocab = set()
    for r in all_reviews:
        vocab.update(re.findall(r"[a-z]+", r["body"].lower()))
    # crude lemma-like variants so lemmatized tokens also resolve
    variants = set()
    for w in vocab:
        for suffix in ("s", "es", "ed", "ing"):
            if w.endswith(suffix) and len(w) > len(suffix) + 2:
                variants.add(w[: -len(suffix)])
    vocab |= variants
    lines = []
    for w in sorted(vocab):
        if w in topic_words:
            base = bases[topic_words[w]]
            v = [b + rng.gauss(0, 0.35) for b in base]
        else:
            v = [rng.gauss(0, 1) for _ in range(dim)]
        norm = math.sqrt(sum(x * x for x in v)) or 1.0
        lines.append(w + " " + " ".join(f"{x / norm:.6f}" for x in v))
    return lines


def main():
    rng = random.Random(20240611)
    OUT.mkdir(parents=True, exist_ok=True)
    everything = []
    for app, spec in APPS.items():
        rows = make_reviews(app, spec, rng)
        everything += rows
        rows = rows + extras(app, len(rows))
        if spec["format"] == "jsonl":
            write_jsonl(OUT / f"{app}.jsonl", rows)
        else:
            write_csv(OUT / f"{app}.csv", rows)
    (OUT / "embeddings.txt").write_text("\n".join(embeddings(everything, rng)) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
