use std::sync::OnceLock;

use nevl_core::classifier::{evaluate, featurize, predict, save_model, train, BinaryLabel, ClassifierModel, TrainConfig};
use nevl_core::synthgen::{offline_generate, SeedLexicon, TemplateBank};
use proptest::prelude::*;

fn model() -> &'static ClassifierModel {
    static MODEL: OnceLock<ClassifierModel> = OnceLock::new();
    MODEL.get_or_init(|| {
        let lex = SeedLexicon::bundled();
        let examples = offline_generate(&lex.seeds[..60], 4, 11, &TemplateBank::bundled()).unwrap();
        train(&examples, &TrainConfig { epochs: 2, ..TrainConfig::default() }).unwrap()
    })
}

const WORDS: &[&str] = &["il", "la", "direttore", "direttrice", "persona", "che", "dirige", "è", "arrivata", "arrivato", "oggi", "l'amica", ",", "."];

fn text() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS), 1..10).prop_map(|w| w.join(" "))
}

fn label() -> impl Strategy<Value = BinaryLabel> {
    prop::sample::select(vec![BinaryLabel::Gendered, BinaryLabel::Neutral])
}

#[test]
fn training_is_deterministic() {
    let lex = SeedLexicon::bundled();
    let examples = offline_generate(&lex.seeds[..40], 3, 5, &TemplateBank::bundled()).unwrap();
    let bytes = || {
        let mut out = Vec::new();
        save_model(&train(&examples, &TrainConfig { epochs: 2, ..TrainConfig::default() }).unwrap(), &mut out).unwrap();
        out
    };
    assert_eq!(bytes(), bytes());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn equal_features_give_equal_predictions(t in text(), pad in "[ \t]{0,3}", gap in "[ ]{1,3}") {
        let variant = format!("{pad}{}{pad}", t.replace(' ', &gap));
        prop_assert_eq!(featurize(&t), featurize(&variant));
        prop_assert_eq!(predict(model(), &t), predict(model(), &variant));
    }

    #[test]
    fn confusion_rows_count_gold_classes(rows in prop::collection::vec((text(), label()), 1..40)) {
        let ev = evaluate(model(), &rows).unwrap();
        let gold = |l: BinaryLabel| rows.iter().filter(|(_, g)| *g == l).count();
        prop_assert_eq!(ev.confusion[0].iter().sum::<usize>(), gold(BinaryLabel::Gendered));
        prop_assert_eq!(ev.confusion[1].iter().sum::<usize>(), gold(BinaryLabel::Neutral));
    }

    #[test]
    fn probabilities_are_probabilities(t in text()) {
        let p = predict(model(), &t);
        prop_assert!((0.0..=1.0).contains(&p.probability));
        prop_assert_eq!(p.label == BinaryLabel::Neutral, p.probability >= model().threshold());
    }
}
