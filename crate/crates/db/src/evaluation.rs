//! Runs the recall/precision sweep through a live engine.

use std::collections::BTreeSet;

use pir_core::eval::{sweep_with, EvalCorpus, EvalQuery, EvalTable};
use pir_core::model::{SketchQuery, Threshold};

use crate::engine::{annotation_from_bilist, Engine};
use crate::error::Result;

/// Inserts every corpus image, then queries each category template at each
/// threshold. Returns the table and the ids assigned to the images.
pub fn evaluate_with_engine(engine: &Engine, corpus: &EvalCorpus, thresholds: &[Threshold]) -> Result<(EvalTable, Vec<String>)> {
    let mut ids = Vec::with_capacity(corpus.images.len());
    for (k, im) in corpus.images.iter().enumerate() {
        let category = im.label.category.as_deref().unwrap_or("unrelated");
        ids.push(engine.insert_image(&annotation_from_bilist(&im.bilist, format!("corpus://{category}/{k}")))?);
    }
    let queries: Vec<EvalQuery<'_, String>> = corpus
        .queries
        .iter()
        .map(|(name, template)| EvalQuery {
            category: name,
            template,
            relevant: corpus
                .images
                .iter()
                .zip(&ids)
                .filter(|(im, _)| im.label.is_relevant_to(name))
                .map(|(_, id)| id.clone())
                .collect::<BTreeSet<_>>(),
        })
        .collect();
    let table = sweep_with(&queries, thresholds, |template, theta| {
        let q = SketchQuery::new(template.clone(), theta).limit(usize::MAX)?;
        Ok(engine.query_sketch(&q).into_iter().map(|r| r.id).collect())
    })?;
    Ok((table, ids))
}
