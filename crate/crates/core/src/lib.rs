pub mod components;
pub mod document;
pub mod fixtures;
pub mod model;
pub mod par;
pub mod reduce;
pub mod sim;
pub mod symexpr;
