//! Competing truncations over the same regions: FSP with an absorbing sink,
//! stochastic FSP with a return state, and finite buffers.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::network::ReactionNetwork;
use crate::statespace::{assemble, dot, intrinsic_laws, Escape, Generator, Region, StateSpace};

/// `W x <= N` together with whatever intrinsic conservation laws are needed to
/// bound the species `W` leaves free (totals taken from `x0`).
pub fn half_space_region(net: &ReactionNetwork, w: &[Vec<i64>], n: &[i64], x0: Option<&[u32]>) -> Result<Region> {
    if w.len() != n.len() || w.iter().any(|r| r.len() != net.n_species()) {
        return Err(Error::InvalidConservation("W must have one row per bound and one column per species".into()));
    }
    let laws = intrinsic_laws(net, w, x0)?;
    Ok(Region::HalfSpaces { w: w.to_vec(), n: n.to_vec(), laws })
}

fn space_for(net: &ReactionNetwork, region: Region) -> Result<StateSpace> {
    if let Region::Rectangle(b) = &region {
        if b.len() != net.n_species() {
            return Err(Error::InvalidArgument("rectangle needs one bound per species".into()));
        }
    }
    StateSpace::from_region(net.species_names(), region)
}

/// FSP: every transition leaving the region goes to one extra absorbing sink.
pub fn build_fsp(net: &ReactionNetwork, region: Region, x0: &[u32]) -> Result<Generator> {
    if !region.contains(x0) {
        return Err(Error::InvalidArgument(format!("initial state {x0:?} lies outside the region")));
    }
    let space = Arc::new(space_for(net, region)?.with_sink());
    let sink = space.sink().expect("sink was just added");
    assemble(space, &net.reaction_vectors(), |r, x| net.intensity(r, x), Escape::To(sink))
}

/// sFSP: escaping rates are added to the entry of the return state `x_star`.
pub fn build_sfsp(net: &ReactionNetwork, region: Region, x_star: &[u32]) -> Result<Generator> {
    if !region.contains(x_star) {
        return Err(Error::InvalidArgument(format!("return state {x_star:?} lies outside the region")));
    }
    let space = Arc::new(space_for(net, region)?);
    let target = space.require(x_star)?;
    assemble(space, &net.reaction_vectors(), |r, x| net.intensity(r, x), Escape::To(target))
}

/// Finite buffer: a reaction whose destination violates `W x <= N` has rate zero.
pub fn build_finite_buffer(net: &ReactionNetwork, w: &[Vec<i64>], n: &[i64], x0: Option<&[u32]>) -> Result<Generator> {
    if let Some(x0) = x0 {
        for (k, (row, &bound)) in w.iter().zip(n).enumerate() {
            let value = dot(row, x0);
            if value > bound {
                return Err(Error::InitialOutOfBounds { row: k, value, bound });
            }
        }
    }
    let region = half_space_region(net, w, n, x0)?;
    let space = Arc::new(space_for(net, region)?);
    assemble(space, &net.reaction_vectors(), |r, x| net.intensity(r, x), Escape::Drop)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_network;
    use crate::statespace::communication_classes;

    fn bd() -> ReactionNetwork {
        parse_network("0 <-> X @ 1, 2").unwrap()
    }

    #[test]
    fn fsp_routes_boundary_birth_to_sink() {
        let a = build_fsp(&bd(), Region::Rectangle(vec![3]), &[0]).unwrap();
        assert_eq!(a.dim(), 5);
        assert_eq!(a.get(3, 4), 1.0);
        assert_eq!(a.exit_rate(4), 0.0);
        for i in 0..a.dim() {
            assert!(a.row_sum(i).abs() < 1e-12);
        }
    }

    #[test]
    fn sfsp_redirects_to_return_state() {
        let a = build_sfsp(&bd(), Region::Rectangle(vec![3]), &[0]).unwrap();
        assert_eq!(a.dim(), 4);
        // state 3: death to 2 at rate 6, escaping birth back to 0 at rate 1
        assert_eq!(a.get(3, 0), 1.0);
        assert_eq!(a.get(3, 2), 6.0);
        let classes = communication_classes(&a);
        assert_eq!(classes.len(), 1);
        assert!(build_sfsp(&bd(), Region::Rectangle(vec![3]), &[7]).is_err());
    }

    #[test]
    fn finite_buffer_drops_escapes() {
        let a = build_finite_buffer(&bd(), &[vec![1]], &[3], Some(&[0])).unwrap();
        assert_eq!(a.dim(), 4);
        assert_eq!(a.exit_rate(3), 6.0);
        assert!(matches!(
            build_finite_buffer(&bd(), &[vec![1]], &[3], Some(&[5])),
            Err(Error::InitialOutOfBounds { .. })
        ));
    }
}
