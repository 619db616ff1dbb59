use std::path::{Path, PathBuf};

use krmn::bench::ExperimentFile;
use krmn::recipes::RECIPES;

fn configs(scale: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(scale)
}

#[test]
fn every_recipe_config_parses_at_both_scales() {
    for recipe in RECIPES {
        for scale in ["desk", "full"] {
            let path = configs(scale).join(recipe.config);
            let file = ExperimentFile::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(file.name, recipe.figure);
        }
    }
}

#[test]
fn full_scale_configs_differ_from_desk_only_in_scale() {
    for recipe in RECIPES {
        let desk = ExperimentFile::load(&configs("desk").join(recipe.config)).unwrap();
        let full = ExperimentFile::load(&configs("full").join(recipe.config)).unwrap();
        assert_eq!(desk.clone().to_full_scale(), full, "{}", recipe.figure);
        for (_, cfg) in &desk.runs {
            assert_eq!((cfg.train_len, cfg.test_len, cfg.trials), (3000, 500, 10));
        }
    }
}

#[test]
fn shipped_parameters_match_published_values() {
    for recipe in RECIPES {
        let file = ExperimentFile::load(&configs("desk").join(recipe.config)).unwrap();
        for (label, cfg) in &file.runs {
            let f = &cfg.filter;
            assert_eq!(f.bandwidth, 0.1, "{label}");
            if f.algorithm.is_quantized() {
                assert_eq!(f.epsilon_u, 2.5, "{label}");
            }
        }
    }
}
