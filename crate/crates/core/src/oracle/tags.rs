use crate::error::{Error, Result};
use crate::seq::{Tag, TagPrefix};

/// Inputs of one tag-oracle step. At sequence start both previous tags are `O`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TagStepContext {
    pub prev_gold_tag: Tag,
    pub curr_gold_tag: Tag,
    pub prev_pred_tag: Tag,
}

impl TagStepContext {
    pub fn new(prev_gold_tag: Tag, curr_gold_tag: Tag, prev_pred_tag: Tag) -> Self {
        TagStepContext {
            prev_gold_tag,
            curr_gold_tag,
            prev_pred_tag,
        }
    }

    /// Context for position `pos` given the gold tags and the predicted
    /// prefix (which must cover `..pos`).
    pub fn at(gold: &[Tag], pred: &[Tag], pos: usize) -> Self {
        let prev = |seq: &[Tag]| {
            if pos == 0 {
                Tag::Outside
            } else {
                seq[pos - 1].clone()
            }
        };
        TagStepContext {
            prev_gold_tag: prev(gold),
            curr_gold_tag: gold[pos].clone(),
            prev_pred_tag: prev(pred),
        }
    }
}

/// Next tag under partial-match span F1.
pub fn partial_f1_next_tag(ctx: &TagStepContext) -> Tag {
    let curr = &ctx.curr_gold_tag;
    let prev = &ctx.prev_pred_tag;
    match curr {
        Tag::Begin(ty) => {
            if prev.prefix() == TagPrefix::B && prev.entity_type() == Some(ty) {
                Tag::Inside(ty.clone())
            } else {
                curr.clone()
            }
        }
        Tag::Inside(ty) => {
            if prev.is_outside() {
                Tag::Begin(ty.clone())
            } else if prev.entity_type() != ctx.prev_gold_tag.entity_type() {
                Tag::Outside
            } else {
                curr.clone()
            }
        }
        Tag::Outside => Tag::Outside,
    }
}

/// Next tag under exact-match span F1.
pub fn exact_f1_next_tag(ctx: &TagStepContext) -> Tag {
    let curr = &ctx.curr_gold_tag;
    let prev = &ctx.prev_pred_tag;
    let prev_gold = &ctx.prev_gold_tag;
    match curr {
        Tag::Begin(_) => {
            if prev.is_outside() {
                curr.clone()
            } else {
                Tag::Outside
            }
        }
        Tag::Inside(_) => {
            if prev.is_outside()
                || (prev.entity_type() != prev_gold.entity_type()
                    && prev.prefix() != prev_gold.prefix())
            {
                Tag::Outside
            } else {
                curr.clone()
            }
        }
        Tag::Outside => Tag::Outside,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TagOracle {
    PartialF1,
    ExactF1,
}

impl TagOracle {
    pub fn next_tag(self, ctx: &TagStepContext) -> Tag {
        match self {
            TagOracle::PartialF1 => partial_f1_next_tag(ctx),
            TagOracle::ExactF1 => exact_f1_next_tag(ctx),
        }
    }
}

/// Rolls the oracle out from `pred_prefix` to the length of `gold`, feeding
/// each output back as the next previous prediction. Returns the full
/// sequence (prefix followed by the completion).
pub fn complete_tags(oracle: TagOracle, gold: &[Tag], pred_prefix: &[Tag]) -> Result<Vec<Tag>> {
    if pred_prefix.len() > gold.len() {
        return Err(Error::PrefixTooLong {
            prefix: pred_prefix.len(),
            gold: gold.len(),
        });
    }
    let mut out = pred_prefix.to_vec();
    out.reserve(gold.len() - pred_prefix.len());
    for pos in pred_prefix.len()..gold.len() {
        let next = oracle.next_tag(&TagStepContext::at(gold, &out, pos));
        out.push(next);
    }
    Ok(out)
}
