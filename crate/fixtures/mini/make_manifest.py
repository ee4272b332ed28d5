#!/usr/bin/env python3
"""Regenerate manifest.json and reference_parses.jsonl for the mini fixture.

Independent of the Rust implementation: its own definition parser, brute-force
counts, and brute-force search answers. Run from this directory.
"""
import json

RESERVED = set('|{}:,="')


def parse_def(text):
    pos = 0

    def ws():
        nonlocal pos
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def label():
        nonlocal pos
        start = pos
        while pos < len(text) and text[pos] not in RESERVED and not text[pos].isspace():
            pos += 1
        assert pos > start, f"empty label at {start} in {text}"
        return text[start:pos]

    def node():
        nonlocal pos
        ws()
        assert text[pos] == '{', text
        pos += 1
        ws()
        if text[pos] == '"':
            pos += 1
            out = []
            while text[pos] != '"':
                if text[pos] == '\\':
                    pos += 1
                out.append(text[pos])
                pos += 1
            pos += 1
            head = {"literal": "".join(out)}
        else:
            en = label()
            ws()
            if en in ('$', '~', '?') and text[pos] != '|':
                head = {"placeholder": en}
            else:
                assert text[pos] == '|'
                pos += 1
                ws()
                zh = label()
                head = {"sememe": f"{en}|{zh}"}
        children = []
        ws()
        if text[pos] == ':':
            while True:
                pos += 1
                ws()
                role = label()
                ws()
                assert text[pos] == '='
                pos += 1
                children.append({"role": role, "tree": node()})
                ws()
                if text[pos] != ',':
                    break
        ws()
        assert text[pos] == '}', text
        pos += 1
        return {"head": head, "children": children}

    tree = node()
    ws()
    assert pos == len(text)
    return tree


def sememes_in(tree):
    out = []
    if "sememe" in tree["head"]:
        out.append(tree["head"]["sememe"])
    for c in tree["children"]:
        out.extend(sememes_in(c["tree"]))
    return out


def max_role_multiplicity(tree):
    counts = {}
    for c in tree["children"]:
        counts[c["role"]] = counts.get(c["role"], 0) + 1
    here = max(counts.values(), default=0)
    return max([here] + [max_role_multiplicity(c["tree"]) for c in tree["children"]])


def search(senses, query, lang, mode):
    if query == "":
        return []
    fields = {"en": ["en"], "zh": ["zh"], "auto": ["en", "zh"]}[lang]
    best = {}
    for s in senses:
        for f in fields:
            w = s[f]
            band = None
            if w == query:
                band = 0
            elif mode in ("prefix", "substring") and w.startswith(query):
                band = 1
            elif mode == "substring" and query in w:
                band = 2
            if band is not None:
                best[s["id"]] = min(best.get(s["id"], 9), band)
    return [i for _, i in sorted((b, i) for i, b in best.items())]


def main():
    tax = [json.loads(l) for l in open("taxonomy.jsonl", encoding="utf-8") if l.strip()]
    senses = [json.loads(l) for l in open("senses.jsonl", encoding="utf-8") if l.strip()]
    by_id = {t["id"]: t for t in tax}
    refs = {f'{t["en"]}|{t["zh"]}': t["id"] for t in tax}

    parses = []
    for s in senses:
        tree = parse_def(s["def"])
        s["tree"] = tree
        assert max_role_multiplicity(tree) <= 2, s["id"]
        for r in sememes_in(tree):
            assert r in refs, (s["id"], r)
        parses.append({"id": s["id"], "tree": tree})

    with open("reference_parses.jsonl", "w", encoding="utf-8") as f:
        for p in parses:
            f.write(json.dumps(p, ensure_ascii=False, separators=(",", ":")) + "\n")

    def chain(i):
        out = []
        p = by_id[i]["parent"]
        while p is not None:
            out.append(p)
            p = by_id[p]["parent"]
        return out

    roots = {}
    sizes = {}
    for t in tax:
        sizes[t["category"]] = sizes.get(t["category"], 0) + 1
        if t["parent"] is None:
            roots[t["category"]] = roots.get(t["category"], 0) + 1

    sememe_senses = {}
    for t in tax:
        ref = f'{t["en"]}|{t["zh"]}'
        sememe_senses[ref] = sorted(s["id"] for s in senses if ref in sememes_in(s["tree"]))

    queries = [
        ("apple", "en", "exact"), ("app", "en", "prefix"), ("apple", "en", "prefix"),
        ("ppl", "en", "substring"), ("苹果", "zh", "exact"), ("苹果", "zh", "prefix"),
        ("果", "zh", "substring"), ("drink", "auto", "exact"), ("phone", "auto", "substring"),
        ("人", "auto", "exact"), ("tree", "en", "substring"), ("", "en", "exact"),
        ("zzz", "en", "substring"),
    ]
    cases = [{"query": q, "lang": l, "mode": m, "ids": search(senses, q, l, m)} for q, l, m in queries]

    manifest = {
        "stats": {
            "sense_count": len(senses),
            "distinct_zh_words": len({s["zh"] for s in senses}),
            "distinct_en_words": len({s["en"] for s in senses}),
            "sememe_count": len(tax),
        },
        "category_roots": roots,
        "category_sizes": sizes,
        "ancestors": {str(t["id"]): chain(t["id"]) for t in tax},
        "sense_ids": [s["id"] for s in senses],
        "senses_by_id": {str(s["id"]): {"zh": s["zh"], "en": s["en"], "pos": s["pos"]} for s in senses},
        "sememe_senses": sememe_senses,
        "search": cases,
        "word_sense_counts": {w: sum(1 for s in senses if s["en"] == w) for w in sorted({s["en"] for s in senses})},
    }
    with open("manifest.json", "w", encoding="utf-8") as f:
        json.dump(manifest, f, ensure_ascii=False, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
