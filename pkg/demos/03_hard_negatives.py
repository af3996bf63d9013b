"""
Minimal label edits that only fine-grained understanding survives
=================================================================

A hard negative is a candidate label one small edit away from the true
one: swap the color word, remove the "not", turn the verb around.  A
detector that matches labels loosely will score such candidates almost
as high as the positive.  This script generates negatives for each
rule-backed aspect and shows the reversible edits.
"""

from nmsap import (
    NegativeRuleSet,
    compute_stats,
    gen_negatives,
    passivize,
    reinsert_negation,
    remove_negation,
)
from nmsap.errors import InapplicableLabel

# Substitution aspects walk a fixed vocabulary in order and replace the
# first token of that vocabulary found in the label.
for aspect, label in [
    ("color", "red car"),
    ("material", "wooden chair"),
    ("position", "the apple on the left of the banana"),
    ("relationship", "person riding horse"),
]:
    negatives = gen_negatives(label, NegativeRuleSet(aspect))
    print(f"{aspect:>12}: {label!r} -> {len(negatives)} negatives")
    for n in negatives[:3]:
        print(f"              {n!r}")

# The position rule produces exactly six candidates, one per remaining
# vocabulary word.
position = gen_negatives("the apple on the left of the banana",
                         NegativeRuleSet("position"))
assert len(position) == 6

# Negation is removal, not substitution, and the edit is reversible:
# reinsert_negation() reconstructs the original string byte for byte.
label = "a shelf not holding any books"
negative, pos, removed = remove_negation(label)
print(f"\nnegation: {label!r}")
print(f"      -> {negative!r}  (removed {removed!r} at offset {pos})")
assert reinsert_negation(negative, pos, removed) == label
print("      round trip verified")

# Relationship labels can also be inverted with a passive rewrite, which
# keeps both nouns but flips who acts on whom.  Irregular participles
# come from a lookup table; regular verbs fall back to -ed.
for label in ("person riding horse", "person holding cup", "person carrying bag"):
    print(f"passive: {label!r} -> {passivize(label)!r}")

# Labels where a rule cannot apply raise instead of guessing.
try:
    gen_negatives("blue car", NegativeRuleSet("position"))
except InapplicableLabel as exc:
    print(f"\nno position token in 'blue car': {exc}")

# compute_stats() summarizes a benchmark's label text; pass the
# generated negatives to get the average negatives per label.
from nmsap import Category, GroundTruthSet, ImageRecord

gt = GroundTruthSet.build(
    images=[ImageRecord(1, 100, 100)],
    categories=[Category(1, "red car"), Category(2, "wooden chair")],
    annotations=[],
)
negatives = {
    "red car": gen_negatives("red car", NegativeRuleSet("color")),
    "wooden chair": gen_negatives("wooden chair", NegativeRuleSet("material")),
}
stats = compute_stats(gt, negatives=negatives)
print(f"\nlabels={stats.labels}, avg words/label={stats.avg_label_words:.2f}, "
      f"avg negatives/label={stats.avg_negative_labels:.1f}")
