pub mod corpus;
pub mod index;
pub mod matrix;
pub mod measures;
pub mod provider;
pub mod query;
pub mod tokenize;

pub use index::{DocumentId, IndexBuilder, IndexError, InvertedIndex, PostingList};
pub use matrix::{compute_matrix, format_fixed, BoundMatrix, Cell, MatrixError};
pub use measures::{
    AbsoluteWeight, AttractionClass, BoundInputs, ConsistencyReport, Count, Epsilon, JointCount,
    MeaningBound, MeasureError, RelativeWeight, UniverseSize,
};
pub use provider::{
    bound_between, bound_report, provider_count, resolved_joint_count, universe_size, BoundReport,
    CountProvider, CountQuery, ProviderDescriptor, ProviderError, ProviderKind, SnapshotTable,
    WithUniverse,
};
pub use query::{QueryError, QueryExpr};
pub use tokenize::{tokenize, Segmentation, TokenPolicy};
