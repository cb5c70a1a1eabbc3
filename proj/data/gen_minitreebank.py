#!/usr/bin/env python3
"""Generates the bundled mini-treebank: synthetic Penn-style trees plus a
handful of hand-written ones.

Usage: gen_minitreebank.py [--seed N] [--count N] [--out PATH]
"""
import argparse
import random

LEX = {
    "DT": ["the", "a", "this", "some", "every", "that", "no", "each"],
    "NN": ["company", "market", "price", "share", "report", "deal", "year", "month", "plan",
           "index", "stake", "unit", "bank", "board", "group", "rate", "loss", "sale", "offer",
           "increase", "rise", "run", "issue", "fund", "firm", "quarter", "week", "change"],
    "NNS": ["shares", "prices", "investors", "analysts", "sales", "rates", "plans", "profits",
            "stocks", "bonds", "months", "years", "units", "traders", "funds", "issues", "costs"],
    "NNP": ["Mr.", "Smith", "Jones", "IBM", "Chicago", "Texas", "Friday", "Monday", "Ford",
            "Boston", "Brown", "Corp.", "Inc.", "Japan", "Europe"],
    "JJ": ["new", "big", "strong", "weak", "recent", "major", "foreign", "high", "low", "first",
           "last", "early", "federal", "financial", "modest", "sharp", "little", "much", "that", "like",
           "over", "down", "up", "more"],
    "VBD": ["said", "rose", "fell", "bought", "sold", "reported", "put", "placed", "expected",
            "saw", "made", "agreed", "added", "closed", "gained", "posted", "offered"],
    "VBZ": ["says", "is", "has", "expects", "plans", "sells", "owns", "makes", "runs", "rises", "issues",
            "reports", "offers", "changes", "funds", "costs", "shares", "rates", "sales"],
    "VBP": ["say", "are", "have", "expect", "own", "sell", "report", "run", "like", "rise", "plan", "issue",
            "change", "fund", "offer", "increase", "deal", "stake", "bank", "group", "rate"],
    "VB": ["be", "buy", "sell", "make", "increase", "report", "rise", "run", "pay", "take", "offer", "change",
           "plan", "issue", "fund", "stake", "bank", "group", "rate", "market", "price"],
    "VBN": ["expected", "sold", "made", "reported", "offered", "put", "bought", "closed"],
    "VBG": ["rising", "selling", "making", "falling", "trading", "buying"],
    "IN": ["of", "in", "on", "for", "with", "at", "by", "from", "about", "that", "because",
           "after", "like", "than", "if", "up", "down", "over"],
    "TO": ["to"],
    "MD": ["will", "would", "could", "can", "may", "might"],
    "RB": ["also", "not", "n't", "still", "only", "now", "very", "sharply", "nearly", "already", "up", "down",
           "over", "that", "more", "much", "about", "early", "high", "low"],
    "PRP": ["it", "he", "they", "we", "she", "I"],
    "PRP$": ["its", "their", "his", "our"],
    "CD": ["one", "two", "10", "50", "100", "1989", "3", "20", "million", "billion"],
    "CC": ["and", "but", "or"],
    "WDT": ["which", "that"],
    "WP": ["who"],
    "POS": ["'s"],
    "$": ["$"],
    ".": ["."],
    ":": ["--", ";"],
    ",": [","],
}

# Verb subcategorization drives VP-vs-NP attachment of PPs.
PP_VERBS = {"put", "placed", "bought", "sold", "offered", "made", "buy", "sell", "make", "pay", "take"}
NOUN_PP = {"price", "share", "stake", "sale", "rise", "increase", "loss", "unit", "index", "change", "offer"}


class Gen:
    def __init__(self, rng):
        self.rng = rng
        self.index = 0
        self.zipf = {tag: self._weights(len(words)) for tag, words in LEX.items()}

    @staticmethod
    def _weights(n):
        return [1.0 / (i + 1) ** 0.8 for i in range(n)]

    def word(self, tag):
        return self.rng.choices(LEX[tag], weights=self.zipf[tag])[0]

    def leaf(self, tag, word=None):
        return "(%s %s)" % (tag, word or self.word(tag))

    def chance(self, p):
        return self.rng.random() < p

    @staticmethod
    def relabel(tree, label):
        return "(" + label + tree[tree.index(" "):]

    @staticmethod
    def last_word(tree):
        return tree.rstrip(")").split()[-1]

    # --- noun phrases -------------------------------------------------------
    def base_np(self, allow_pronoun=True):
        r = self.rng.random()
        if allow_pronoun and r < 0.10:
            return "(NP %s)" % self.leaf("PRP")
        if r < 0.14:
            return "(NP %s)" % self.leaf(self.rng.choice(["NN", "NNS", "NNP"]))
        if r < 0.18:
            names = [self.leaf("NNP") for _ in range(self.rng.choice([1, 2, 2, 3]))]
            return "(NP %s)" % " ".join(names)
        if r < 0.25:
            return "(NP %s %s)" % (self.qp() if self.chance(0.3) else self.leaf("CD"), self.leaf("NNS"))
        if r < 0.29:
            return "(NP %s %s)" % (self.leaf("$"), self.qp() if self.chance(0.5) else self.leaf("CD"))
        if r < 0.37:
            mods = [self.leaf("JJ")] if self.chance(0.4) else []
            return "(NP %s)" % " ".join(mods + [self.leaf("NNS")])
        if r < 0.44:
            mods = [self.adjp_inner()] if self.chance(0.3) else []
            return "(NP %s)" % " ".join([self.leaf("PRP$")] + mods + [self.leaf("NN")])
        parts = [self.leaf("DT")]
        if self.chance(0.35):
            parts.append(self.leaf("JJ"))
        if self.chance(0.12):
            parts.append(self.adjp_inner())
        if self.chance(0.2):
            parts.append(self.leaf("NN"))
        if self.chance(0.08):
            parts.append(self.leaf("NNP"))
        parts.append(self.leaf("NN" if self.chance(0.75) else "NNS"))
        return "(NP %s)" % " ".join(parts)

    def adjp_inner(self):
        if self.chance(0.5):
            return "(ADJP %s %s)" % (self.leaf("RB"), self.leaf("JJ"))
        return "(ADJP %s %s %s)" % (self.leaf("JJ"), self.leaf("CC", "and"), self.leaf("JJ"))

    def qp(self):
        if self.chance(0.5):
            return "(QP %s %s)" % (self.leaf("CD"), self.leaf("CD", self.rng.choice(["million", "billion"])))
        return "(QP %s %s %s)" % (self.leaf("RB", "nearly"), self.leaf("CD"), self.leaf("CD", "million"))

    def np(self, depth, func="", allow_pronoun=True):
        base = self.base_np(allow_pronoun)
        label = "NP" + func
        if depth > 3:
            return self.relabel(base, label)
        noun = self.last_word(base)
        r = self.rng.random()
        if noun in NOUN_PP and r < 0.5:
            return "(%s %s %s)" % (label, base, self.pp(depth + 1, prep="of"))
        if r < 0.20:
            return "(%s %s %s)" % (label, base, self.pp(depth + 1))
        if r < 0.27:
            return "(%s %s %s)" % (label, base, self.relative(depth + 1))
        if r < 0.33:
            other = self.np(depth + 2, allow_pronoun=False)
            return "(%s %s %s %s)" % (label, base, self.leaf("CC"), other)
        if r < 0.37:
            appos = self.np(depth + 2, allow_pronoun=False)
            return "(%s %s %s %s %s)" % (label, base, self.leaf(","), appos, self.leaf(","))
        if r < 0.41:
            possessor = "(NP %s %s)" % (self.leaf("NNP"), self.leaf("POS"))
            mods = [self.leaf("JJ")] if self.chance(0.5) else []
            return "(%s %s)" % (label, " ".join([possessor] + mods + [self.leaf("NN")]))
        if r < 0.44:
            return "(%s %s %s)" % (label, base, self.vp_reduced(depth + 1))
        return self.relabel(base, label)

    def vp_reduced(self, depth):
        return "(VP %s %s)" % (self.leaf("VBN"), self.pp(depth + 1, func="-LOC" if self.chance(0.3) else ""))

    def relative(self, depth):
        self.index += 1
        i = self.index
        wh = "(WHNP-%d %s)" % (i, self.leaf("WDT" if self.chance(0.6) else "WP"))
        subj = "(NP-SBJ (-NONE- *T*-%d))" % i
        return "(SBAR %s (S %s %s))" % (wh, subj, self.vp(depth + 1, finite=True))

    # --- other phrases ------------------------------------------------------
    def pp(self, depth, prep=None, func=""):
        p = prep or self.rng.choice(["in", "on", "for", "with", "at", "by", "from", "about", "after", "like",
                                     "up", "down", "over"])
        return "(PP%s %s %s)" % (func, self.leaf("IN", p), self.np(depth + 1))

    def adjp(self, depth):
        r = self.rng.random()
        if r < 0.25:
            return "(ADJP %s %s)" % (self.leaf("RB"), self.leaf("JJ"))
        if r < 0.40 and depth < 4:
            return "(ADJP %s %s)" % (self.leaf("JJ"), self.pp(depth + 1))
        if r < 0.50:
            return "(ADJP %s %s %s)" % (self.leaf("JJ"), self.leaf("CC"), self.leaf("JJ"))
        return "(ADJP %s)" % self.leaf("JJ")

    def advp(self):
        if self.chance(0.2):
            return "(ADVP %s %s)" % (self.leaf("RB", "very"), self.leaf("RB"))
        return "(ADVP %s)" % self.leaf("RB")

    def verb(self, finite, plural):
        r = self.rng.random()
        if not finite:
            return self.leaf("VB")
        if r < 0.6:
            return self.leaf("VBD")
        return self.leaf("VBP" if plural else "VBZ")

    def vp(self, depth, finite=True, subject_plural=False):
        if depth > 5:
            return "(VP %s %s)" % (self.leaf("VBD"), self.base_np())
        verb = self.verb(finite, subject_plural)
        vword = self.last_word(verb)
        r = self.rng.random()
        if finite and r < 0.08:
            return "(VP %s %s)" % (self.leaf("MD"), self.vp(depth + 1, finite=False))
        if finite and r < 0.11:
            return "(VP %s %s)" % (self.leaf("VBZ", "has") if not subject_plural else self.leaf("VBP", "have"),
                                   "(VP %s %s)" % (self.leaf("VBN"), self.np(depth + 1)))
        if finite and r < 0.14 and depth < 3:
            first = self.vp(depth + 2, finite=True, subject_plural=subject_plural)
            second = self.vp(depth + 2, finite=True, subject_plural=subject_plural)
            return "(VP %s %s %s)" % (first, self.leaf("CC"), second)
        if finite and r < 0.18:
            return "(VP %s %s %s)" % (verb, self.leaf("RB"), self.adjp(depth + 1) if self.chance(0.5) else self.np(depth + 1))
        if vword in ("said", "says", "say", "expected", "expects", "expect") and r < 0.55:
            comp = self.leaf("IN", "that") if self.chance(0.5) else "(-NONE- 0)"
            return "(VP %s (SBAR %s %s))" % (verb, comp, self.clause(depth + 1))
        if vword in PP_VERBS and r < 0.65:
            func = "-CLR" if vword in ("put", "placed") else ""
            return "(VP %s %s %s)" % (verb, self.np(depth + 1), self.pp(depth + 1, func=func))
        if vword in ("rose", "fell", "rises", "rise", "gained", "closed") and r < 0.7:
            amount = "(NP-EXT %s %s)" % (self.leaf("CD"), self.leaf("NNS"))
            if self.chance(0.5):
                return "(VP %s %s %s)" % (verb, amount, self.pp(depth + 1, prep="to"))
            return "(VP %s %s)" % (verb, amount)
        if r < 0.30:
            return "(VP %s)" % verb
        if r < 0.34:
            return "(VP %s %s %s)" % (verb, self.np(depth + 1), self.np_tmp())
        if r < 0.37:
            return "(VP %s %s)" % (verb, self.prn(depth + 1))
        if r < 0.40 and depth < 4:
            return "(VP %s %s)" % (verb, self.ucp(depth + 1))
        if r < 0.60:
            return "(VP %s %s)" % (verb, self.np(depth + 1))
        if r < 0.70:
            return "(VP %s %s %s)" % (verb, self.np(depth + 1),
                                      self.pp(depth + 1, func="-TMP" if self.chance(0.3) else ""))
        if r < 0.75:
            return "(VP %s %s %s)" % (verb, self.np(depth + 1), self.advp())
        if r < 0.80:
            return "(VP %s %s)" % (verb, self.adjp(depth + 1))
        if r < 0.86:
            self.index += 1
            return "(VP %s (S (NP-SBJ (-NONE- *-%d)) (VP %s %s)))" % (
                verb, self.index, self.leaf("TO"), self.vp(depth + 2, finite=False))
        if r < 0.91 and depth < 4:
            conj = self.rng.choice(["because", "after", "if"])
            return "(VP %s %s (SBAR-ADV %s %s))" % (verb, self.np(depth + 1), self.leaf("IN", conj),
                                                   self.clause(depth + 2))
        if r < 0.95:
            return "(VP %s (ADVP-TMP %s))" % (verb, self.leaf("RB"))
        return "(VP %s %s)" % (verb, self.pp(depth + 1))

    def np_tmp(self):
        return "(NP-TMP %s)" % self.rng.choice([
            self.leaf("NNP", self.rng.choice(["Friday", "Monday"])),
            "%s %s" % (self.leaf("JJ", "last"), self.leaf("NN", self.rng.choice(["year", "month", "week", "quarter"]))),
        ])

    def prn(self, depth):
        return "(NP (NP %s) (PRN %s %s %s))" % (self.leaf("NNS"), self.leaf(","), self.clause(depth + 1), self.leaf(","))

    def ucp(self, depth):
        return "(UCP %s %s %s)" % (self.adjp(depth + 1), self.leaf("CC"), self.base_np(False))

    def fragment(self):
        r = self.rng.random()
        if r < 0.4:
            return "(FRAG %s (: --) %s %s)" % (self.np(2), self.np(2), self.leaf("."))
        if r < 0.7:
            return "(FRAG %s %s)" % (self.pp(1), self.leaf("."))
        return "(S (VP %s %s) %s)" % (self.leaf("VB"), self.np(1), self.leaf("."))

    def subject(self, depth):
        subj = self.np(depth, func="-SBJ")
        head = subj.split("(NP")[1] if subj.count("(NP") > 1 else subj
        plural = "(NNS" in head or "(PRP they)" in head or "(PRP we)" in head
        return subj, plural

    def clause(self, depth):
        subj, plural = self.subject(depth + 1)
        if self.chance(0.1):
            return "(S %s %s %s)" % (subj, self.advp(), self.vp(depth + 1, subject_plural=plural))
        return "(S %s %s)" % (subj, self.vp(depth + 1, subject_plural=plural))

    def sentence(self):
        r = self.rng.random()
        subj, plural = self.subject(0)
        vp = self.vp(0, subject_plural=plural)
        if r < 0.12:
            front = self.pp(1, func="-TMP" if self.chance(0.5) else "-LOC")
            body = "(S %s %s %s %s %s)" % (front, self.leaf(","), subj, vp, self.leaf("."))
        elif r < 0.22:
            second = self.clause(1)
            body = "(S (S %s %s) %s %s %s %s)" % (subj, vp, self.leaf(","), self.leaf("CC"), second,
                                                 self.leaf("."))
        elif r < 0.27:
            body = "(S %s %s %s %s)" % (self.leaf("CC", "But"), subj, vp, self.leaf("."))
        elif r < 0.33:
            conj = self.rng.choice(["because", "after", "if"])
            adv = "(SBAR-ADV %s %s)" % (self.leaf("IN", conj), self.clause(2))
            body = "(S %s %s %s %s %s)" % (adv, self.leaf(","), subj, vp, self.leaf("."))
        elif r < 0.38:
            body = "(S %s %s %s %s %s)" % (self.advp(), self.leaf(","), subj, vp, self.leaf("."))
        elif r < 0.45:
            body = self.fragment()
        else:
            body = "(S %s %s %s)" % (subj, vp, self.leaf("."))
        return "( %s)" % body


HAND = [
    "( (S (NP-SBJ (DT The) (NN company)) (VP (VBD said) (SBAR (-NONE- 0) (S (NP-SBJ (PRP it)) (VP (MD will) (VP (VB sell) (NP (DT the) (NN unit))))))) (. .)) )",
    "( (S (NP-SBJ (NNS Investors)) (VP (VBD bought) (NP (NNS shares)) (PP (IN in) (NP (NNP Chicago)))) (. .)) )",
    "( (S (NP-SBJ (NNP Mr.) (NNP Smith)) (VP (VBD put) (NP (DT the) (NN stake)) (PP-CLR (IN on) (NP (DT the) (NN market)))) (. .)) )",
    "( (S (NP-SBJ (DT The) (NN price)) (VP (VBD rose) (NP-EXT (CD 10) (NNS units))) (. .)) )",
    "( (S (NP-SBJ (NNS Analysts)) (VP (VBP expect) (NP (DT a) (JJ modest) (NN increase) )) (. .)) )",
    "( (S (PP-TMP (IN After) (NP (DT the) (NN report))) (, ,) (NP-SBJ (NNS stocks)) (VP (VBD fell) (ADVP (RB sharply))) (. .)) )",
    "( (S (NP-SBJ (NP (DT The) (NN firm)) (SBAR (WHNP-1 (WDT which)) (S (NP-SBJ (-NONE- *T*-1)) (VP (VBZ owns) (NP (DT the) (NN bank)))))) (VP (VBD posted) (NP (DT a) (NN loss))) (. .)) )",
    "( (S (NP-SBJ (PRP They)) (VP (VBD agreed) (S (NP-SBJ (-NONE- *-2)) (VP (TO to) (VP (VB buy) (NP (DT the) (NN fund)))))) (. .)) )",
    "( (S (NP-SBJ (DT The) (NN board)) (VP (VBD made) (NP (DT an) (NN offer)) (PP (IN for) (NP (NNP IBM)))) (. .)) )",
    "( (S (NP-SBJ (NP (DT The) (NN sale)) (PP (IN of) (NP (DT the) (NN unit)))) (VP (VBD closed) (NP-TMP (NNP Friday))) (. .)) )",
    "( (S (NP-SBJ (NNS Prices)) (VP (VBD rose) (PP (TO to) (NP (CD 50) (NNS units)))) (. .)) )",
    "( (S (NP-SBJ (PRP He)) (VP (VBZ says) (SBAR (IN that) (S (NP-SBJ (NNS rates)) (VP (MD could) (VP (VB rise))))) ) (. .)) )",
    "( (S (NP-SBJ (DT The) (NN bank)) (VP (VBD reported) (NP (NP (DT a) (NN loss)) (PP (IN of) (NP ($ $) (CD 20) (CD million))))) (. .)) )",
    "( (S (CC But) (NP-SBJ (NNS traders)) (VP (VBD sold) (NP (NNS bonds)) (PP-TMP (IN on) (NP (NNP Monday)))) (. .)) )",
    "( (S (S (NP-SBJ (NNS Stocks)) (VP (VBD fell))) (, ,) (CC and) (S (NP-SBJ (NNS bonds)) (VP (VBD gained))) (. .)) )",
    "( (S (NP-SBJ (NP (NNP Ford) (POS 's)) (JJ recent) (NN offer)) (VP (VBD was) (ADJP (JJ strong))) (. .)) )",
    "( (S (NP-SBJ (DT Each) (NN unit)) (VP (MD will) (VP (VB pay) (NP (CD one) (NNS shares)))) (. .)) )",
    "( (S (NP-SBJ (PRP We)) (VP (VBP like) (NP (DT the) (NN deal))) (. .)) )",
    "( (S (NP-SBJ (DT The) (NN group)) (VP (VBZ has) (NP (NP (DT a) (NN stake)) (PP (IN in) (NP (DT the) (NN firm))))) (. .)) )",
    "( (S (NP-SBJ (NNS Sales)) (VP (VBD rose) (NP-EXT (CD 3) (NNS units)) (PP-TMP (IN in) (NP (DT the) (JJ first) (NN quarter)))) (. .)) )",
]

HEADS = """ADJP left NNS QP NN $ ADVP JJ VBN VBG ADJP JJR NP JJS DT FW RBR RBS SBAR RB
ADVP right RB RBR RBS FW ADVP TO CD JJR JJ IN NP JJS NN
NP right NN NNP NNPS NNS NX POS JJR PRP NP CD JJ QP
PP left IN TO VBG VBN RP FW
S left TO IN VP S SBAR ADJP UCP NP
SBAR left WHNP WHPP WHADVP WHADJP IN DT S SQ SINV SBAR FRAG
VP left TO VBD VBN MD VBZ VB VBG VBP VP ADJP NN NNS NP
WHNP left WDT WP WP$ WHADJP WHPP WHNP
"""


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=1997)
    ap.add_argument("--count", type=int, default=1000)
    ap.add_argument("--out", default="minitreebank.mrg")
    ap.add_argument("--heads", default="heads.txt")
    args = ap.parse_args()
    rng = random.Random(args.seed)
    gen = Gen(rng)
    trees = [gen.sentence() for _ in range(args.count)]
    # Hand trees are interleaved so every split sees some of them.
    step = max(1, len(trees) // len(HAND))
    for i, t in enumerate(HAND):
        trees.insert(i * (step + 1), t)
    with open(args.out, "w") as f:
        for t in trees:
            f.write(t + "\n")
    with open(args.heads, "w") as f:
        f.write(HEADS)


if __name__ == "__main__":
    main()
