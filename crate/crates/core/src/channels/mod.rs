//! Doubly stochastic maps, T-transform witnesses and pinched images.

mod maps;
mod pinching;
mod witness;

pub use maps::{apply_map, DoublyStochasticMap, MapRepr, TTransform};
pub use pinching::{
    best_flat_image, best_flat_image_distance, eigenvalue_cap_check, impossibility_bound, pinch_spectrum,
    trace_distance_commuting, FlatImage, ImpossibilityBound, PinchedSpectrum, PinchingMap,
};
pub use witness::{t_transform_chain, t_transform_chain_with_cap, TransformWitness, DEFAULT_WITNESS_CAP};
