use crate::distribution::JointDistribution;
use crate::error::{Error, Result};
use crate::landscape::GameMatrix;
use crate::shape::{Genotype, Shape};

/// True iff no single player gains by switching its action: every
/// unilateral deviation pays at most the current payoff.
pub fn is_pure_nash(g: &GameMatrix, genotype: &Genotype) -> bool {
    let here = g.get(genotype);
    (0..g.shape().k()).all(|j| (0..g.shape().n(j)).all(|a| g.get(&genotype.deviate(j, a)) <= here))
}

/// The game restricted to the actions used by the support of a
/// distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Subgame {
    pub game: GameMatrix,
    /// `allele_maps[j][i]` is the original index of restricted allele `i`.
    pub allele_maps: Vec<Vec<usize>>,
}

impl Subgame {
    pub fn to_original(&self, genotype: &Genotype) -> Genotype {
        Genotype(
            genotype
                .alleles()
                .iter()
                .zip(&self.allele_maps)
                .map(|(&i, map)| map[i])
                .collect(),
        )
    }

    /// `None` if the genotype uses an allele outside the support.
    pub fn from_original(&self, genotype: &Genotype) -> Option<Genotype> {
        genotype
            .alleles()
            .iter()
            .zip(&self.allele_maps)
            .map(|(a, map)| map.iter().position(|m| m == a))
            .collect::<Option<Vec<_>>>()
            .map(Genotype)
    }
}

/// Keeps allele `i` of locus `j` iff some genotype with positive
/// probability carries it.
pub fn subgame_restrict(g: &GameMatrix, p: &JointDistribution) -> Result<Subgame> {
    g.shape().ensure_same(p.shape())?;
    let allele_maps = p.support_alleles();
    if allele_maps.iter().any(Vec::is_empty) {
        return Err(Error::EmptySupport);
    }
    let shape = Shape::new(allele_maps.iter().map(Vec::len).collect())?;
    let sub = Subgame {
        game: g.clone(),
        allele_maps,
    };
    let values = (0..shape.len())
        .map(|flat| g.get(&sub.to_original(&shape.unravel(flat))))
        .collect();
    Ok(Subgame {
        game: GameMatrix::with_shape(shape, values)?,
        ..sub
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{reference_initial, reference_landscape};

    #[test]
    fn reference_equilibria() {
        let g = reference_landscape();
        assert!(is_pure_nash(&g, &g.argmax()));
        assert!(is_pure_nash(&g, &Genotype(vec![1, 0])));
        assert!(!is_pure_nash(&g, &Genotype(vec![0, 1])));
    }

    #[test]
    fn full_support_keeps_game() {
        let g = reference_landscape();
        let sub = subgame_restrict(&g, &reference_initial()).unwrap();
        assert_eq!(sub.game, g);
        assert_eq!(sub.allele_maps, vec![vec![0, 1, 2], vec![0, 1]]);
    }

    #[test]
    fn point_support_collapses() {
        let g = reference_landscape();
        let p = JointDistribution::point(g.shape().clone(), &Genotype(vec![2, 1])).unwrap();
        let sub = subgame_restrict(&g, &p).unwrap();
        assert_eq!(sub.game.shape().alleles(), &[1, 1]);
        assert_eq!(sub.game.values(), &[0.8]);
        assert_eq!(sub.to_original(&Genotype(vec![0, 0])), Genotype(vec![2, 1]));
    }

    #[test]
    fn empty_row_is_dropped() {
        let g = reference_landscape();
        let p = JointDistribution::from_rows(&[vec![0.2, 0.3], vec![0.0, 0.0], vec![0.25, 0.25]]).unwrap();
        let sub = subgame_restrict(&g, &p).unwrap();
        assert_eq!(sub.game.values(), &[1.0, 0.5, 1.3, 0.8]);
        assert_eq!(sub.from_original(&Genotype(vec![1, 0])), None);
        assert_eq!(sub.from_original(&Genotype(vec![2, 1])), Some(Genotype(vec![1, 1])));
        // (a_3, b_1) is an equilibrium only once a_2 is unavailable.
        assert!(!is_pure_nash(&g, &Genotype(vec![2, 0])));
        assert!(is_pure_nash(&sub.game, &Genotype(vec![1, 0])));
    }
}
