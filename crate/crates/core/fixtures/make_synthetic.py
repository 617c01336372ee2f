"""Regenerates synthetic_50.jsonl.

Fifteen months of history (2023-01 to 2024-03) in which every directory has
one dedicated reviewer. Contributors rotate across directories, a generalist
reviews now and then, and a few records exercise cleaning: a bot comment
stream, a PR opened by a bot, an open PR and a reviewer seen only once.
"""

import json
from datetime import datetime, timedelta, timezone
from pathlib import Path

DIRS = {
    "src/net": ("rita-net", ["tcp/conn.rs", "http/client.rs", "mod.rs", "tls/handshake.rs"]),
    "src/ui": ("uma-ui", ["widgets/button.rs", "layout/grid.rs", "theme.rs", "widgets/table.rs"]),
    "src/db": ("dan-db", ["sql/query.rs", "pool.rs", "migrate/v2.rs", "sql/schema.rs"]),
    "docs": ("doris-docs", ["guide/intro.md", "api/index.md", "faq.md", "guide/setup.md"]),
    "src/core": ("carl-core", ["engine/run.rs", "config.rs", "engine/plan.rs", "error.rs"]),
}
CONTRIBUTORS = ["alice", "bob", "carol", "dave", "erin", "frank"]
GENERALIST = "gina"
BOT = "ci-bot[bot]"


def ts(t):
    return t.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def main():
    records = []
    dirs = list(DIRS)
    n = 0
    for month in range(15):
        year, mon = 2023 + month // 12, month % 12 + 1
        per_month = 4 if month in (0, 5, 10) else 3
        for j in range(per_month):
            created = datetime(year, mon, 2 + 8 * j, 10, 0, tzinfo=timezone.utc)
            d = dirs[n % len(dirs)]
            reviewer, files = DIRS[d]
            contributor = CONTRIBUTORS[(n * 5 + n // 6) % len(CONTRIBUTORS)]
            picked = [f"{d}/{files[(n + k) % len(files)]}" for k in range(1 + n % 3)]
            comments = [
                {"author": reviewer, "created_at": ts(created + timedelta(hours=20 + 6 * c))}
                for c in range(1 + n % 2)
            ]
            if n % 7 == 3:
                comments.append({"author": GENERALIST, "created_at": ts(created + timedelta(days=2))})
            if n % 4 == 0:
                comments.append({"author": BOT, "created_at": ts(created + timedelta(minutes=5))})
            if n % 5 == 2:
                comments.append({"author": contributor, "created_at": ts(created + timedelta(days=1, hours=2))})
            if n == 17:
                comments.append({"author": "oscar", "created_at": ts(created + timedelta(days=3))})
            records.append({
                "id": str(1000 + n),
                "contributor": contributor,
                "created_at": ts(created),
                "state": "closed" if n % 9 == 4 else "merged",
                "files": picked,
                "comments": comments,
                "labels": ["synthetic"],
            })
            n += 1

    records.append({
        "id": "2000",
        "contributor": "dependabot[bot]",
        "created_at": ts(datetime(2023, 6, 20, 3, 0, tzinfo=timezone.utc)),
        "state": "merged",
        "files": ["Cargo.lock"],
        "comments": [{"author": "rita-net", "created_at": ts(datetime(2023, 6, 20, 9, 0, tzinfo=timezone.utc))}],
    })
    records.append({
        "id": "2001",
        "contributor": "bob",
        "created_at": ts(datetime(2024, 3, 28, 12, 0, tzinfo=timezone.utc)),
        "state": "open",
        "files": ["src/net/tcp/conn.rs"],
        "comments": [],
    })
    records.sort(key=lambda r: (r["created_at"], r["id"]))
    out = Path(__file__).with_name("synthetic_50.jsonl")
    out.write_text("".join(json.dumps(r, separators=(",", ":")) + "\n" for r in records))
    print(f"wrote {len(records)} records to {out}")


if __name__ == "__main__":
    main()
