use super::{widget_label, GroupedUiState, Widget};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution<'a> {
    Found(&'a Widget),
    NotFound,
    /// More than one widget matched at the winning tier.
    Ambiguous(Vec<&'a Widget>),
}

/// Maps a model-supplied target string to a visible widget.
///
/// Tiers, first non-empty wins: exact label, exact identifier,
/// case-insensitive identifier, case-insensitive substring of an identifier.
pub fn resolve_target<'a>(state: &'a GroupedUiState, target: &str) -> Resolution<'a> {
    let target = target.trim();
    if target.is_empty() {
        return Resolution::NotFound;
    }
    let mut candidates: Vec<&Widget> = Vec::new();
    for w in state.visible_widgets() {
        if !candidates.iter().any(|c| c.node_index == w.node_index) {
            candidates.push(w);
        }
    }

    let bracketed = format!("[{target}]");
    let lowered = target.to_lowercase();
    fn full_id(w: &Widget) -> Option<&str> {
        w.resource_id.as_deref().filter(|s| !s.is_empty())
    }

    let tiers: [&dyn Fn(&Widget) -> bool; 4] = [
        &|w| {
            let label = widget_label(w);
            label == target || label == bracketed
        },
        &|w| w.identifiers().any(|id| id == target) || full_id(w) == Some(target),
        &|w| w.identifiers().any(|id| id.to_lowercase() == lowered),
        &|w| w.identifiers().any(|id| id.to_lowercase().contains(&lowered)),
    ];

    for tier in tiers {
        let hits: Vec<&Widget> = candidates.iter().copied().filter(|w| tier(w)).collect();
        match hits.len() {
            0 => continue,
            1 => return Resolution::Found(hits[0]),
            _ => return Resolution::Ambiguous(hits),
        }
    }
    Resolution::NotFound
}
