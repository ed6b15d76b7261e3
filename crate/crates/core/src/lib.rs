pub mod error;
pub mod spaceform;
pub mod mesh;
pub mod discrete;
pub mod pinching;
pub mod compare;
pub mod stability;
pub mod report;
pub mod verdict;
