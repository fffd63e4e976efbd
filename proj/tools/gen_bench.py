#!/usr/bin/env python3
"""Generate the benchmark circuits in bench/ (deterministic; rerun to refresh).

Each circuit mixes hand-built fixtures (crossing paths, hold registers,
redundant logic) with seeded random logic. Random logic is built from small
datapath blocks (adders, comparators, mux banks, decoders, parity trees and
sum-of-products terms) whose operands come mostly from state, inputs and
block outputs nobody reads yet, and every dangling net is finally folded into a flop D input or a primary output,
so almost all logic is observable.
"""

import argparse
import pathlib
import random

class Circuit:
    def __init__(self, name, rng):
        self.name = name
        self.rng = rng
        self.lines = []
        self.domains = []
        self.inputs = []
        self.outputs = []
        self.gate_lines = []
        self.flops = []  # (q, d, domain, scan)
        self.readers = {}
        self.group = {}  # decoder outputs share a group: never two in one block
        self.counter = 0

    def domain(self, name, ratio):
        self.domains.append((name, ratio))
        return name

    def input(self, name):
        self.inputs.append(name)
        self.readers.setdefault(name, 0)
        return name

    def gate(self, kind, ins, name=None):
        if name is None:
            name = f"n{self.counter}"
            self.counter += 1
        self.gate_lines.append(f"{name} = {kind}({', '.join(ins)})")
        for i in ins:
            self.readers[i] = self.readers.get(i, 0) + 1
        self.readers.setdefault(name, 0)
        return name

    def flop(self, q, domain, scan=True):
        self.flops.append([q, None, domain, scan])
        self.readers.setdefault(q, 0)
        return q

    def is_scan(self, q):
        return any(f[0] == q and f[3] for f in self.flops)

    def set_d(self, q, d):
        for f in self.flops:
            if f[0] == q:
                f[1] = d
                self.readers[d] = self.readers.get(d, 0) + 1
                return
        raise KeyError(q)

    def output(self, net):
        self.outputs.append(net)
        self.readers[net] = self.readers.get(net, 0) + 1

    def gate_count(self):
        return len(self.gate_lines)

    def pick(self, pool, k):
        """k distinct nets: unread block outputs first, then state and inputs."""
        rng = self.rng
        chosen = []
        while len(chosen) < min(k, len(pool)):
            unread = [p for p in pool[self.n_sources:] if self.readers.get(p, 0) == 0 and p not in chosen]
            r = rng.random()
            if unread and r < 0.4:
                cand = rng.choice(unread)
            elif r < 0.8:
                cand = rng.choice(pool[:self.n_sources])
            else:
                cand = rng.choice(pool)
            group = self.group.get(cand)
            if cand not in chosen and (group is None or all(self.group.get(c) != group for c in chosen)):
                chosen.append(cand)
        return chosen

    def pick2(self, pool, width):
        """Two operand words and one extra bit, all distinct."""
        nets = self.pick(pool, 2 * width + 1)
        return nets[:width], nets[width:2 * width], nets[-1]

    def block(self, pool):
        """One randomly chosen datapath block over nets of `pool`."""
        rng = self.rng
        kind = rng.choice(["adder", "compare", "mux", "parity", "sop", "sop", "incr"])
        width = rng.randint(2, 4)
        g = self.gate
        if kind == "adder":
            a, b, carry = self.pick2(pool, width)
            outs = []
            for x, y in zip(a, b):
                p = g("XOR", [x, y])
                outs.append(g("XOR", [p, carry]))
                carry = g("OR", [g("AND", [x, y]), g("AND", [p, carry])])
            return outs + [carry]
        if kind == "incr":
            *bits, carry = self.pick(pool, width + 1)
            outs = []
            for x in bits:
                outs.append(g("XOR", [x, carry]))
                carry = g("AND", [x, carry])
            return outs + [carry]
        if kind == "compare":
            a, b, _ = self.pick2(pool, width)
            eq = [g("XNOR", [x, y]) for x, y in zip(a, b)]
            return [g("AND", eq) if len(eq) > 1 else eq[0], g("NAND", [a[0], g("NOT", [b[0]])])]
        if kind == "mux":
            a, b, sel = self.pick2(pool, width)
            return [g("MUX2", [x, y, sel]) for x, y in zip(a, b)]
        if kind == "decode":
            s0, s1, en = self.pick(pool, 3)
            n0, n1 = g("NOT", [s0]), g("NOT", [s1])
            outs = [g("AND", [en, x, y]) for x, y in ((n0, n1), (s0, n1), (n0, s1), (s0, s1))]
            for o in outs:
                self.group[o] = outs[0]
            return outs
        if kind == "parity":
            bits = self.pick(pool, width + 1)
            acc = bits[0]
            for x in bits[1:]:
                acc = g(rng.choice(["XOR", "XNOR"]), [acc, x])
            return [acc]
        outs = []
        for _ in range(rng.randint(1, 2)):
            terms = []
            for _ in range(rng.randint(2, 3)):
                lits = [x if rng.random() < 0.6 else g("NOT", [x]) for x in self.pick(pool, rng.randint(2, 3))]
                terms.append(g(rng.choice(["AND", "NAND"]), lits))
            outs.append(g(rng.choice(["OR", "NOR", "NAND"]), terms))
        return outs

    def random_logic(self, sources, count, prefix_pool=None):
        """Adds about `count` gates of datapath blocks; returns the block outputs."""
        pool = list(sources) if prefix_pool is None else list(prefix_pool)
        self.n_sources = len(sources) if prefix_pool is None else len(prefix_pool)
        created = []
        start = self.gate_count()
        while self.gate_count() - start < count:
            outs = self.block(pool)
            pool += outs
            created += outs
        return created

    def dangling(self, nets):
        return [n for n in nets if self.readers.get(n, 0) == 0]

    def sink(self, flops, nets, outputs):
        """Drives the given flops and `outputs` POs from `nets`, folding the
        unread ones in with XOR gates."""
        rng = self.rng
        loose = self.dangling(nets)
        rng.shuffle(loose)
        targets = len(flops) + outputs
        while len(loose) > targets:
            a, b = loose.pop(), loose.pop()
            loose.insert(0, self.gate("XOR", [a, b]))
        fallback = [n for n in nets if n not in loose]
        while len(loose) < targets:
            loose.append(rng.choice(fallback[-30:] if fallback else nets))
        for q in flops:
            self.set_d(q, loose.pop())
        for _ in range(outputs):
            self.output(loose.pop())

    def write(self, path, chains, header):
        out = [f"# {header}"]
        for name, ratio in self.domains:
            out.append(f"DOMAIN {name} PLLRATIO {ratio}")
        out += [f"INPUT({i})" for i in self.inputs]
        for cname, cells in chains:
            out.append(f"INPUT(si_{cname})")
        out += [f"OUTPUT({o})" for o in self.outputs]
        out += self.gate_lines
        prev = {}
        for cname, cells in chains:
            for k, q in enumerate(cells):
                prev[q] = f"si_{cname}" if k == 0 else cells[k - 1]
        for q, d, dom, scan in self.flops:
            assert d is not None, q
            if scan:
                out.append(f"{q} = SDFF({d}, si={prev[q]}, domain={dom})")
            else:
                out.append(f"{q} = DFF({d}, domain={dom})")
        for cname, cells in chains:
            out.append(f"CHAIN {cname} SI=si_{cname} SO={cells[-1]} CELLS={','.join(cells)}")
        path.write_text("\n".join(out) + "\n")


def chains_for(c, max_len):
    chains = []
    for dom, _ in c.domains:
        cells = [q for q, _, d, scan in c.flops if d == dom and scan]
        for k in range(0, len(cells), max_len):
            chains.append((f"{dom}_{k // max_len}", cells[k:k + max_len]))
    return chains


def multi_domain(name, seed, domains, flops, non_scan, pis, pos, logic, crossing, max_chain):
    """domains: [(name, ratio)], flops/non_scan/logic per domain; crossing:
    {(src, dst): gate count} of logic fed only by the source domain."""
    rng = random.Random(seed)
    c = Circuit(name, rng)
    for d, r in domains:
        c.domain(d, r)
    ins = [c.input(f"pi{i}") for i in range(pis)]
    qs, nets = {}, {}
    for k, (d, _) in enumerate(domains):
        qs[d] = []
        for i in range(flops[k]):
            scan = i < flops[k] - non_scan[k]
            qs[d].append(c.flop(f"{d}_{'r' if scan else 'h'}{i}", d, scan))
    scan_qs = {d: [q for q in qs[d] if c.is_scan(q)] for d, _ in domains}
    for k, (d, _) in enumerate(domains):
        nets[d] = c.random_logic(scan_qs[d] + ins, logic[k])
        # Non-scan state is only read through a hold mux selected by scan state.
        for h in qs[d][len(scan_qs[d]):]:
            loose = c.dangling(nets[d])
            local = loose[0] if loose else nets[d][-1]
            nets[d].append(c.gate("MUX2", [local, h, rng.choice(scan_qs[d])]))
    cross_out = {d: [] for d, _ in domains}
    for (src, dst), count in crossing.items():
        # Crossing cones read only source-domain state.
        made = c.random_logic(scan_qs[src], count, prefix_pool=scan_qs[src] + nets[src][-20:])
        cross_out[dst] += c.dangling(made)
    per_po = [pos // len(domains) + (1 if k < pos % len(domains) else 0) for k in range(len(domains))]
    for k, (d, _) in enumerate(domains):
        local = c.dangling(nets[d])
        mixed = []
        for x in cross_out[d]:
            partner = local.pop() if local else rng.choice(nets[d])
            mixed.append(c.gate("XOR", [x, partner]))
        c.sink(qs[d], nets[d] + mixed, per_po[k])
    return c, chains_for(c, max_chain)


def crossing_toy():
    rng = random.Random(11)
    c = Circuit("crossing_toy", rng)
    a = c.domain("clk_a", 1)
    b = c.domain("clk_b", 2)
    pis = [c.input(f"pi{i}") for i in range(2)]
    qa = [c.flop(f"a{i}", a) for i in range(4)]
    qb = [c.flop(f"b{i}", b) for i in range(4)]
    na = c.random_logic(qa + pis, 22)
    nb = c.random_logic(qb + pis, 22)
    # Pure crossing cones: only domain-a state reaches domain-b captures.
    x0 = c.gate("AND", [qa[0], qa[1]], "x0")
    x1 = c.gate("OR", [qa[2], qa[3]], "x1")
    x2 = c.gate("XOR", [x0, x1], "x2")
    x3 = c.gate("NAND", [qa[1], qa[2]], "x3")
    x4 = c.gate("NOR", [x3, qa[0]], "x4")
    lb = c.dangling(nb)
    y0 = c.gate("XOR", [x2, lb.pop() if lb else nb[-1]], "y0")
    y1 = c.gate("XNOR", [x4, lb.pop() if lb else nb[-2]], "y1")
    c.sink(qa, na, 1)
    c.sink(qb, nb + [y0, y1], 1)
    return c, [("ca", qa), ("cb", qb)]


def hold_path():
    rng = random.Random(23)
    c = Circuit("hold_path", rng)
    clk = c.domain("clk", 1)
    pis = [c.input(f"pi{i}") for i in range(3)]
    cfg = [c.flop(f"cfg{i}", clk) for i in range(2)]
    reg = [c.flop(f"r{i}", clk) for i in range(4)]
    en = c.flop("en", clk)
    # Configuration bits reload their own value every functional cycle.
    for q in cfg:
        c.set_d(q, c.gate("BUF", [q], f"{q}_hold"))
    c.set_d(en, c.gate("XOR", [en, pis[0]], "en_next"))
    mode = c.gate("AND", [cfg[0], f"{cfg[0]}_hold"], "mode_a")
    mode_b = c.gate("OR", [cfg[1], pis[1]], "mode_b")
    logic = c.random_logic(reg + pis + [mode, mode_b], 44)
    loose = c.dangling(logic)
    for k, q in enumerate(reg):
        new = loose[k % len(loose)] if loose else logic[-1 - k]
        c.set_d(q, c.gate("MUX2", [q, new, en], f"{q}_next"))
    c.sink([], logic, 2)
    return c, [("c0", cfg + reg + [en])]


def redundant_small():
    rng = random.Random(31)
    c = Circuit("redundant_small", rng)
    clk = c.domain("clk", 1)
    pis = [c.input(f"pi{i}") for i in range(3)]
    q = [c.flop(f"s{i}", clk) for i in range(8)]
    # Constant-one NAND(a, a'): its stuck-at-1 faults are redundant.
    na = c.gate("NOT", [q[0]], "inv_s0")
    tie = c.gate("NAND", [q[0], na], "tie1")
    g0 = c.gate("AND", [tie, q[1]], "tied_and")
    # Consensus: s2 s3 + s2' s4 + s3 s4, the last term is redundant.
    t1 = c.gate("AND", [q[2], q[3]], "cons_a")
    n2 = c.gate("NOT", [q[2]], "inv_s2")
    t2 = c.gate("AND", [n2, q[4]], "cons_b")
    t3 = c.gate("AND", [q[3], q[4]], "cons_red")
    cons = c.gate("OR", [t1, t2, t3], "cons")
    # Absorption: s5 + s5 s6.
    ab = c.gate("AND", [q[5], q[6]], "absorbed")
    absorb = c.gate("OR", [q[5], ab], "absorb")
    logic = c.random_logic(q + pis + [g0, cons, absorb], 42)
    c.sink(q, logic + [g0, cons, absorb], 2)
    return c, [("c0", q)]


def partial_scan():
    return multi_domain("partial_scan", 41, [("clk_a", 1), ("clk_b", 2)], [7, 6], [2, 1], 3, 3,
                        [70, 60], {("clk_a", "clk_b"): 10}, 8)


def two_domain_small():
    rng = random.Random(53)
    c = Circuit("two_domain_small", rng)
    a = c.domain("clk_a", 2)
    b = c.domain("clk_b", 1)
    pis = [c.input(f"pi{i}") for i in range(3)]
    qa = [c.flop(f"a{i}", a) for i in range(6)]
    qb = [c.flop(f"b{i}", b) for i in range(6)]
    na = c.random_logic(qa + pis, 44)
    nb = c.random_logic(qb + pis, 44)
    # Crossing cones in both directions, each fed by one domain only.
    ab = c.random_logic(qa, 9, prefix_pool=qa)
    ba = c.random_logic(qb, 9, prefix_pool=qb)
    la, lb = c.dangling(na), c.dangling(nb)
    mix_b = [c.gate("XOR", [x, lb.pop() if lb else nb[-1]]) for x in c.dangling(ab)]
    mix_a = [c.gate("XOR", [x, la.pop() if la else na[-1]]) for x in c.dangling(ba)]
    c.sink(qa, na + mix_a, 2)
    c.sink(qb, nb + mix_b, 2)
    return c, [("ca", qa), ("cb", qb)]


def three_domain():
    return multi_domain("three_domain", 61, [("clk_a", 1), ("clk_b", 2), ("clk_c", 3)], [10, 10, 8],
                        [0, 1, 0], 5, 6, [90, 80, 60],
                        {("clk_a", "clk_b"): 12, ("clk_b", "clk_c"): 10, ("clk_c", "clk_a"): 8}, 10)


def random_pair(name, seed, gates, flops, max_chain):
    per = gates // 2
    cross = max(8, gates // 25)
    return multi_domain(name, seed, [("clk_a", 1), ("clk_b", 2)], [flops - flops // 2, flops // 2],
                        [0, 1], 8, 8, [per - cross, per - cross], {("clk_a", "clk_b"): cross,
                                                                   ("clk_b", "clk_a"): cross // 2},
                        max_chain)


CIRCUITS = {
    "crossing_toy": (crossing_toy, "minimal inter-domain demonstrator"),
    "hold_path": (hold_path, "registers that reload their own value"),
    "redundant_small": (redundant_small, "constant, consensus and absorption redundancies"),
    "two_domain_small": (two_domain_small, "two domains with crossing cones in both directions"),
    "partial_scan": (partial_scan, "two domains with non-scan state"),
    "three_domain": (three_domain, "three domains, ring of crossing cones"),
    "rand200": (lambda: random_pair("rand200", 105, 200, 24, 8), "random two-domain logic"),
    "rand400": (lambda: random_pair("rand400", 101, 400, 40, 10), "random two-domain logic"),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "bench"))
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, (make, header) in CIRCUITS.items():
        c, chains = make()
        c.write(out / f"{name}.net", chains, f"{name}: {header} (tools/gen_bench.py)")
        print(f"{name}: {c.gate_count()} gates, {len(c.flops)} flops")


if __name__ == "__main__":
    main()
