//! Heegner points, Kolyvagin primes and Shafarevich-Tate bounds for
//! rank-one elliptic curves over Q, with finite models of the Selmer
//! machinery behind the bounds.

pub mod curve;
pub mod finite;
pub mod galois;
pub mod heegner;
pub mod kolyvagin;
pub mod numeric;
pub mod pipeline;
pub mod selmer;
