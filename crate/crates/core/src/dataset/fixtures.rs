use super::{parse_records, ExperimentRecord, Schema};
use crate::error::{Error, Result};

/// A bundled result table.
#[derive(Debug, Clone, Copy)]
pub struct FixtureInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub text: &'static str,
}

macro_rules! fixture {
    ($name:literal, $desc:literal) => {
        FixtureInfo {
            name: $name,
            description: $desc,
            text: include_str!(concat!("../../fixtures/", $name, ".csv")),
        }
    };
}

const CATALOG: &[FixtureInfo] = &[
    fixture!("cifar10_real", "CIFAR-10, real data augmentation, ResNet-110"),
    fixture!("cifar10_edm", "CIFAR-10, closed-set augmentation with EDM, ResNet-110"),
    fixture!(
        "cifar10_cifake",
        "CIFAR-10, open-set augmentation with CIFAKE, ResNet-110"
    ),
    fixture!("bloodmnist_real", "BloodMNIST, real data augmentation, ResNet-110"),
    fixture!(
        "bloodmnist_edm",
        "BloodMNIST, closed-set augmentation with EDM, ResNet-110"
    ),
    fixture!("imagenet100_real", "ImageNet-100, real data augmentation, ResNet-50"),
    fixture!(
        "imagenet100_dit",
        "ImageNet-100, closed-set augmentation with DiT, ResNet-50"
    ),
    fixture!(
        "imagenet100_sd3",
        "ImageNet-100, open-set augmentation with SD3, ResNet-50"
    ),
    fixture!("imagenet100_vit_real", "ImageNet-100, real data augmentation, ViT-B/32"),
    fixture!(
        "imagenet100_vit_dit",
        "ImageNet-100, closed-set augmentation with DiT, ViT-B/32"
    ),
    fixture!(
        "imagenet100_vit_sd3",
        "ImageNet-100, open-set augmentation with SD3, ViT-B/32"
    ),
    fixture!(
        "imagenet10_sd",
        "ImageNet-10, real data added to SD2/SD3 synthetic sets"
    ),
    fixture!("zeroshot", "Zero-shot classification, ImageNet-10 and ImageNet-100"),
];

/// Named bundles of fixtures that together make one study.
pub const FIXTURE_GROUPS: &[(&str, &[&str])] = &[
    ("cifar10", &["cifar10_real", "cifar10_edm", "cifar10_cifake"]),
    ("bloodmnist", &["bloodmnist_real", "bloodmnist_edm"]),
    (
        "imagenet100",
        &["imagenet100_real", "imagenet100_dit", "imagenet100_sd3"],
    ),
    (
        "imagenet100_vit",
        &["imagenet100_vit_real", "imagenet100_vit_dit", "imagenet100_vit_sd3"],
    ),
];

pub fn fixture_catalog() -> &'static [FixtureInfo] {
    CATALOG
}

/// Loads one bundled table.
pub fn load_fixture(name: &str) -> Result<Vec<ExperimentRecord>> {
    let info = CATALOG
        .iter()
        .find(|f| f.name == name)
        .ok_or_else(|| Error::UnknownFixture(name.to_string()))?;
    parse_records(info.text, &Schema::default())
}

/// Loads a group (e.g. `cifar10`) or, failing that, a single fixture.
pub fn fixture_group(name: &str) -> Result<Vec<ExperimentRecord>> {
    match FIXTURE_GROUPS.iter().find(|(g, _)| *g == name) {
        Some((_, members)) => {
            let mut all = Vec::new();
            for m in *members {
                all.extend(load_fixture(m)?);
            }
            Ok(all)
        }
        None => load_fixture(name),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Mode;

    fn count(name: &str) -> (usize, usize) {
        let recs = load_fixture(name).unwrap();
        let baselines = recs.iter().filter(|r| r.is_baseline()).count();
        (recs.len(), baselines)
    }

    #[test]
    fn row_counts_match_tables() {
        assert_eq!(count("cifar10_real"), (12, 3));
        assert_eq!(count("cifar10_edm"), (24, 4));
        assert_eq!(count("cifar10_cifake"), (21, 4));
        assert_eq!(count("bloodmnist_real"), (7, 2));
        assert_eq!(count("bloodmnist_edm"), (18, 3));
        assert_eq!(count("imagenet100_real"), (11, 2));
        assert_eq!(count("imagenet100_dit"), (16, 3));
        assert_eq!(count("imagenet100_sd3"), (16, 3));
        assert_eq!(count("imagenet100_vit_real"), (11, 2));
        assert_eq!(count("imagenet100_vit_dit"), (16, 3));
        assert_eq!(count("imagenet100_vit_sd3"), (16, 3));
        assert_eq!(count("imagenet10_sd"), (10, 0));
        assert_eq!(count("zeroshot"), (14, 3));
    }

    #[test]
    fn spot_values() {
        let edm = load_fixture("cifar10_edm").unwrap();
        assert!(edm
            .iter()
            .any(|r| r.n_base == 50_000 && r.added_syn == 250_000 && r.accuracy == 96.42 && r.mode == Mode::ClosedSet));
        let blood = load_fixture("bloodmnist_edm").unwrap();
        assert!(blood
            .iter()
            .any(|r| r.n_base == 1200 && r.added_syn == 4800 && r.accuracy == 95.32));
        let real = load_fixture("cifar10_real").unwrap();
        assert!(real
            .iter()
            .any(|r| r.n_base == 5000 && r.added_real == 5000 && r.accuracy == 83.56));
    }

    #[test]
    fn unknown_fixture() {
        assert_eq!(
            load_fixture("nosuch").unwrap_err(),
            Error::UnknownFixture("nosuch".into())
        );
    }

    #[test]
    fn groups_resolve() {
        assert_eq!(fixture_group("cifar10").unwrap().len(), 12 + 24 + 21);
        assert_eq!(fixture_group("zeroshot").unwrap().len(), 14);
        assert!(fixture_group("nosuch").is_err());
    }

    #[test]
    fn every_fixture_parses() {
        for f in fixture_catalog() {
            load_fixture(f.name).unwrap_or_else(|e| panic!("{}: {e}", f.name));
        }
    }
}
