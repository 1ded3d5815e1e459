"""Render task instances into text pairs and decode model outputs."""

from chemtext import (
    TaskInstance, TaskKind, default_templates_path, extract_smiles,
    format_instance, load_templates, parse_label, parse_numeric,
    select_template,
)
from chemtext.prompts import decode_spans, encode_spans

templates = load_templates(default_templates_path())

# A property-prediction instance renders through its dataset's template.
inst = TaskInstance(TaskKind.PROP_CLASSIFICATION,
                    {"smiles": "CC(C)NCC(O)COc1ccccc1", "label": "1"},
                    instance_id="bbbp-17", dataset="bbbp")
tmpl = select_template(templates, inst.task, inst.instance_id, seed=0,
                       dataset=inst.dataset)
pair = format_instance(inst, tmpl)
print("input: ", pair.input)
print("target:", pair.target)

# Regression targets always carry six decimals.
reg = TaskInstance(TaskKind.PROP_REGRESSION,
                   {"smiles": "COc1cc(c(c(c1O)OC)Cl)C=O", "value": -1.013714},
                   dataset="freesolv")
print("regression target:",
      format_instance(reg, select_template(templates, reg.task, "x", 0,
                                           dataset="freesolv")).target)

# Span tasks mark mentions inline; decoding tolerates drifted generations.
text = "Study protocol : Rehabilitation in Children and Teenagers with Cancer"
spans = [(17, 31)]
marked = encode_spans(text, spans, ("Intervention*", "*Intervention"))
print("marked:", marked)
decoded, warnings = decode_spans(marked, text, ("Intervention*", "*Intervention"))
print("decoded:", decoded, "warnings:", warnings)

# Output decoders: strict labels, first number, best-effort SMILES.
print(parse_label("The final answer is (D).", TaskKind.QA_MULTICHOICE, list("ABCD")))
print(parse_label("maybe so", TaskKind.QA_YESNO, ["yes", "no", "maybe"]))  # reject
print(parse_numeric("pKa is 4.76 at 25C"))
print(extract_smiles("the product is CC(=O)Oc1ccccc1C(=O)O here"))
