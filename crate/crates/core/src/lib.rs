pub mod linalg;
pub mod algebra;
pub mod homology;
pub mod cdga;
pub mod bar;
pub mod catalog;
pub mod tor;
pub mod invariants;
