//! Matrix groups over finite fields and Galois rings: exact arithmetic,
//! Haar sampling, trace data of matrix powers, characteristic-polynomial
//! statistics and conjugacy-class probabilities.

pub mod ring;
pub mod linalg;
pub mod poly;
pub mod palindromic;
pub mod hayes;
pub mod trace;
pub mod factor;
pub mod matrix;
pub mod groups;
pub mod char_derivative;
pub mod conjugacy;
pub mod experiments;
