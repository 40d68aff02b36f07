use super::{CountProvider, CountQuery, ProviderDescriptor, ProviderError, ProviderKind};
use crate::index::InvertedIndex;
use crate::measures::Count;

impl CountProvider for InvertedIndex {
    fn descriptor(&self) -> ProviderDescriptor {
        ProviderDescriptor {
            kind: ProviderKind::Local,
            exact: true,
            universe: self.total_docs().get(),
        }
    }

    fn count(&self, query: &CountQuery) -> Result<Count, ProviderError> {
        Ok(match &query.exclude {
            None => self.conjunction_count(&query.include),
            Some(ex) => self.conjunction_but_not_count(&query.include, ex),
        })
    }
}
