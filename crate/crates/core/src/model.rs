//! Credal network domain types.
//!
//! A [`CredalNetwork`] is a polytree of categorical variables. Every variable
//! carries one [`ConditionalCredalTable`]: for each configuration of its
//! parents, a finite list of vertices (distributions over the variable).
//! Lists for different parent configurations are separately specified, so a
//! point of the strong extension is obtained by picking one vertex from every
//! list independently ([`VertexSelection`]).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use thiserror::Error;

/// Index of a variable inside its network (declaration order).
pub type VarId = usize;

/// Absolute tolerance on the sum of a user supplied distribution.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("distribution entry {index} = {value} is outside [0, 1]")]
    EntryOutOfRange { index: usize, value: f64 },
    #[error("distribution sums to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("empty vertex list")]
    EmptyVertexList,
    #[error("vertex has {found} entries, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vertex index {index} out of range for local set {set} with {len} vertices")]
    VertexOutOfRange { set: LocalSetId, index: usize, len: usize },
    #[error("local set {0} does not exist")]
    UnknownLocalSet(LocalSetId),
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("variable {variable:?} has no category {category:?}")]
    UnknownCategory { variable: String, category: String },
    #[error("variable {0:?} appears twice in the evidence")]
    DuplicateEvidence(String),
    #[error("invalid network: {0}")]
    Invalid(#[from] Violation),
}

/// The first invariant a network fails, as reported by [`validate`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("duplicate variable name {0:?}")]
    DuplicateVariable(String),
    #[error("variable {0:?} has no categories")]
    NoCategories(String),
    #[error("variable {variable:?} repeats category {category:?}")]
    DuplicateCategory { variable: String, category: String },
    #[error("expected {expected} tables, found {found}")]
    TableCount { expected: usize, found: usize },
    #[error("table at position {position} describes variable {child}")]
    TableOrder { position: usize, child: VarId },
    #[error("variable {variable:?} has an out-of-range parent index {parent}")]
    UnknownParent { variable: String, parent: VarId },
    #[error("variable {variable:?} lists parent {parent:?} more than once or as itself")]
    DuplicateParent { variable: String, parent: String },
    #[error("directed cycle through {0:?}")]
    Cycle(String),
    #[error("not a polytree: undirected cycle through edge {parent:?} -> {child:?}")]
    NotPolytree { parent: String, child: String },
    #[error("variable {variable:?} has {found} configurations, expected {expected}")]
    MissingConfiguration { variable: String, expected: usize, found: usize },
    #[error("variable {variable:?}, configuration {config}: empty vertex list")]
    EmptyVertexList { variable: String, config: usize },
    #[error("variable {variable:?}, configuration {config}, vertex {row}: {reason}")]
    BadVertex { variable: String, config: usize, row: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    name: String,
    categories: Vec<String>,
}

impl Variable {
    pub fn new<S: Into<String>>(name: S, categories: Vec<String>) -> Self {
        Variable { name: name.into(), categories }
    }

    /// A variable with categories named `{lowercase name}{index}`.
    pub fn with_cardinality<S: Into<String>>(name: S, cardinality: usize) -> Self {
        let name = name.into();
        let prefix = name.to_lowercase();
        let categories = (0..cardinality).map(|i| format!("{prefix}{i}")).collect();
        Variable { name, categories }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn cardinality(&self) -> usize {
        self.categories.len()
    }

    pub fn category_index(&self, label: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == label)
    }
}

/// A probability distribution over the categories of one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    /// Checks entries in `[0, 1]` and the sum within [`NORMALIZATION_TOLERANCE`].
    /// Values are never renormalized.
    pub fn new(probs: Vec<f64>) -> Result<Self, ModelError> {
        for (index, &value) in probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(ModelError::EntryOutOfRange { index, value });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(ModelError::NotNormalized { sum });
        }
        Ok(Distribution(probs))
    }

    /// Wraps computed probabilities without checking them.
    pub fn from_vec_unchecked(probs: Vec<f64>) -> Self {
        Distribution(probs)
    }

    pub fn point_mass(cardinality: usize, category: usize) -> Self {
        let mut probs = vec![0.0; cardinality];
        probs[category] = 1.0;
        Distribution(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for Distribution {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// `K(child | parents)`: one vertex list per parent configuration.
///
/// Parent configurations are indexed mixed-radix over `parents` in declared
/// order, most significant first.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalCredalTable {
    child: VarId,
    parents: Vec<VarId>,
    sets: Vec<Vec<Distribution>>,
}

impl ConditionalCredalTable {
    /// Exact duplicate vertices within a list are dropped.
    pub fn new(child: VarId, parents: Vec<VarId>, sets: Vec<Vec<Distribution>>) -> Self {
        let sets = sets
            .into_iter()
            .map(|list| {
                let mut out: Vec<Distribution> = Vec::with_capacity(list.len());
                for d in list {
                    if !out.contains(&d) {
                        out.push(d);
                    }
                }
                out
            })
            .collect();
        ConditionalCredalTable { child, parents, sets }
    }

    /// A root table with a single marginal credal set.
    pub fn root(child: VarId, vertices: Vec<Distribution>) -> Self {
        Self::new(child, Vec::new(), vec![vertices])
    }

    pub fn child(&self) -> VarId {
        self.child
    }

    pub fn parents(&self) -> &[VarId] {
        &self.parents
    }

    pub fn sets(&self) -> &[Vec<Distribution>] {
        &self.sets
    }

    pub fn vertices(&self, config: usize) -> &[Distribution] {
        &self.sets[config]
    }

    pub fn configurations(&self) -> usize {
        self.sets.len()
    }
}

/// Addresses one vertex list: a variable and one configuration of its parents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocalSetId {
    pub variable: VarId,
    pub config: usize,
}

impl LocalSetId {
    pub fn new(variable: VarId, config: usize) -> Self {
        LocalSetId { variable, config }
    }
}

impl fmt::Display for LocalSetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.variable, self.config)
    }
}

/// Observed categories, keyed by variable.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Evidence(BTreeMap<VarId, usize>);

impl Evidence {
    pub fn new() -> Self {
        Evidence(BTreeMap::new())
    }

    pub fn with(mut self, variable: VarId, category: usize) -> Self {
        self.0.insert(variable, category);
        self
    }

    pub fn insert(&mut self, variable: VarId, category: usize) -> Option<usize> {
        self.0.insert(variable, category)
    }

    pub fn get(&self, variable: VarId) -> Option<usize> {
        self.0.get(&variable).copied()
    }

    pub fn contains(&self, variable: VarId) -> bool {
        self.0.contains_key(&variable)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, usize)> + '_ {
        self.0.iter().map(|(&v, &c)| (v, c))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Parses `VAR=CAT,VAR=CAT` against the network's names.
    pub fn parse(net: &CredalNetwork, text: &str) -> Result<Self, ModelError> {
        let mut evidence = Evidence::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, label) = item
                .split_once('=')
                .ok_or_else(|| ModelError::UnknownVariable(item.to_string()))?;
            let (var, cat) = net.resolve(name.trim(), label.trim())?;
            if evidence.insert(var, cat).is_some() {
                return Err(ModelError::DuplicateEvidence(name.trim().to_string()));
            }
        }
        Ok(evidence)
    }
}

/// `[lower, upper]` with `0 <= lower <= upper <= 1` for probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityInterval {
    pub lower: f64,
    pub upper: f64,
}

impl ProbabilityInterval {
    pub fn new(lower: f64, upper: f64) -> Self {
        ProbabilityInterval { lower, upper }
    }

    pub fn point(value: f64) -> Self {
        ProbabilityInterval { lower: value, upper: value }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// True when `other` lies inside `self` up to `slack`.
    pub fn encloses(&self, other: &ProbabilityInterval, slack: f64) -> bool {
        self.lower <= other.lower + slack && other.upper <= self.upper + slack
    }

    pub fn contains(&self, value: f64, slack: f64) -> bool {
        self.lower - slack <= value && value <= self.upper + slack
    }
}

impl fmt::Display for ProbabilityInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.6}, {:.6}]", self.lower, self.upper)
    }
}

/// One interval per category of a variable. Also used for unnormalized
/// interval-valued functions (likelihood messages) during propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalPotential(Vec<ProbabilityInterval>);

impl IntervalPotential {
    pub fn new(bounds: Vec<ProbabilityInterval>) -> Self {
        IntervalPotential(bounds)
    }

    pub fn from_bounds(lower: &[f64], upper: &[f64]) -> Self {
        assert_eq!(lower.len(), upper.len());
        IntervalPotential(
            lower.iter().zip(upper).map(|(&l, &u)| ProbabilityInterval::new(l, u)).collect(),
        )
    }

    /// Every entry `[value, value]`.
    pub fn constant(len: usize, value: f64) -> Self {
        IntervalPotential(vec![ProbabilityInterval::point(value); len])
    }

    pub fn degenerate(values: &[f64]) -> Self {
        IntervalPotential(values.iter().map(|&v| ProbabilityInterval::point(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bounds(&self) -> &[ProbabilityInterval] {
        &self.0
    }

    pub fn lowers(&self) -> Vec<f64> {
        self.0.iter().map(|b| b.lower).collect()
    }

    pub fn uppers(&self) -> Vec<f64> {
        self.0.iter().map(|b| b.upper).collect()
    }

    pub fn lower_sum(&self) -> f64 {
        self.0.iter().map(|b| b.lower).sum()
    }

    pub fn upper_sum(&self) -> f64 {
        self.0.iter().map(|b| b.upper).sum()
    }

    pub fn is_degenerate(&self) -> bool {
        self.0.iter().all(|b| b.lower == b.upper)
    }

    /// Componentwise product of two nonnegative boxes.
    pub fn product(&self, other: &IntervalPotential) -> IntervalPotential {
        assert_eq!(self.len(), other.len());
        IntervalPotential(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| ProbabilityInterval::new(a.lower * b.lower, a.upper * b.upper))
                .collect(),
        )
    }

    pub fn encloses(&self, other: &IntervalPotential, slack: f64) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a.encloses(b, slack))
    }
}

impl std::ops::Index<usize> for IntervalPotential {
    type Output = ProbabilityInterval;
    fn index(&self, i: usize) -> &ProbabilityInterval {
        &self.0[i]
    }
}

/// Minimization or maximization of a query probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Min,
    Max,
}

impl Direction {
    /// Maps a value onto a scale where larger is always better.
    pub fn score(self, value: f64) -> f64 {
        match self {
            Direction::Max => value,
            Direction::Min => -value,
        }
    }

    /// The endpoint of an outer interval relevant to this direction.
    pub fn bound(self, interval: &ProbabilityInterval) -> f64 {
        match self {
            Direction::Max => interval.upper,
            Direction::Min => interval.lower,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Min => "min",
            Direction::Max => "max",
        })
    }
}

/// A network with polytree structure, immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct CredalNetwork {
    variables: Vec<Variable>,
    tables: Vec<ConditionalCredalTable>,
    children: Vec<Vec<VarId>>,
    set_offsets: Vec<usize>,
}

impl CredalNetwork {
    /// Builds and validates a network. `tables[i]` must describe variable `i`.
    pub fn new(
        variables: Vec<Variable>,
        tables: Vec<ConditionalCredalTable>,
    ) -> Result<Self, ModelError> {
        validate(&variables, &tables)?;
        let mut children = vec![Vec::new(); variables.len()];
        for table in &tables {
            for &p in table.parents() {
                children[p].push(table.child());
            }
        }
        let mut set_offsets = Vec::with_capacity(variables.len() + 1);
        let mut acc = 0;
        for table in &tables {
            set_offsets.push(acc);
            acc += table.configurations();
        }
        set_offsets.push(acc);
        Ok(CredalNetwork { variables, tables, children, set_offsets })
    }

    pub fn validate(&self) -> Result<(), Violation> {
        validate(&self.variables, &self.tables)
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id]
    }

    pub fn cardinality(&self, id: VarId) -> usize {
        self.variables[id].cardinality()
    }

    pub fn tables(&self) -> &[ConditionalCredalTable] {
        &self.tables
    }

    pub fn table(&self, id: VarId) -> &ConditionalCredalTable {
        &self.tables[id]
    }

    pub fn parents(&self, id: VarId) -> &[VarId] {
        self.tables[id].parents()
    }

    pub fn children(&self, id: VarId) -> &[VarId] {
        &self.children[id]
    }

    /// Undirected neighbours: parents first, then children.
    pub fn neighbours(&self, id: VarId) -> impl Iterator<Item = VarId> + '_ {
        self.parents(id).iter().chain(self.children(id)).copied()
    }

    pub fn find(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name() == name)
    }

    /// Resolves a `(variable name, category label)` pair.
    pub fn resolve(&self, name: &str, label: &str) -> Result<(VarId, usize), ModelError> {
        let var = self.find(name).ok_or_else(|| ModelError::UnknownVariable(name.to_string()))?;
        let cat = self.variables[var].category_index(label).ok_or_else(|| {
            ModelError::UnknownCategory { variable: name.to_string(), category: label.to_string() }
        })?;
        Ok((var, cat))
    }

    /// Cardinalities of the parents of `id`, in declared order.
    pub fn parent_cardinalities(&self, id: VarId) -> Vec<usize> {
        self.parents(id).iter().map(|&p| self.cardinality(p)).collect()
    }

    /// Total number of local credal sets.
    pub fn local_set_count(&self) -> usize {
        *self.set_offsets.last().unwrap_or(&0)
    }

    /// Position of a local set in (variable, configuration) order.
    pub fn flat_index(&self, id: LocalSetId) -> usize {
        self.set_offsets[id.variable] + id.config
    }

    pub fn local_set_at(&self, flat: usize) -> LocalSetId {
        let variable = self.set_offsets.partition_point(|&o| o <= flat) - 1;
        LocalSetId { variable, config: flat - self.set_offsets[variable] }
    }

    /// All local sets in (variable, configuration) order.
    pub fn local_sets(&self) -> impl Iterator<Item = LocalSetId> + '_ {
        self.tables.iter().enumerate().flat_map(|(v, t)| {
            (0..t.configurations()).map(move |c| LocalSetId::new(v, c))
        })
    }

    pub fn contains_set(&self, id: LocalSetId) -> bool {
        id.variable < self.len() && id.config < self.tables[id.variable].configurations()
    }

    /// Topological order (parents before children), ties by declaration order.
    pub fn topological_order(&self) -> Vec<VarId> {
        let mut indegree: Vec<usize> = self.tables.iter().map(|t| t.parents().len()).collect();
        let mut ready: std::collections::BTreeSet<VarId> =
            (0..self.len()).filter(|&v| indegree[v] == 0).collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &c in self.children(v) {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        order
    }

    /// Ancestors of `seeds`, seeds included.
    pub fn ancestral_set(&self, seeds: impl IntoIterator<Item = VarId>) -> Vec<bool> {
        let mut marked = vec![false; self.len()];
        let mut stack: Vec<VarId> = seeds.into_iter().collect();
        while let Some(v) = stack.pop() {
            if !std::mem::replace(&mut marked[v], true) {
                stack.extend_from_slice(self.parents(v));
            }
        }
        marked
    }

    /// Variables whose local sets can influence `p(query | evidence)`: the
    /// connected part of the ancestral set of query and evidence that holds
    /// the query. Everything else is barren or d-separated from the query.
    pub fn relevant_variables(&self, query: VarId, evidence: &Evidence) -> Vec<bool> {
        let ancestral =
            self.ancestral_set(std::iter::once(query).chain(evidence.iter().map(|(v, _)| v)));
        let mut component = vec![false; self.len()];
        let mut stack = vec![query];
        component[query] = true;
        while let Some(v) = stack.pop() {
            for n in self.neighbours(v) {
                if ancestral[n] && !component[n] {
                    component[n] = true;
                    stack.push(n);
                }
            }
        }
        component
    }

    pub fn vertices(&self, id: LocalSetId) -> &[Distribution] {
        self.tables[id.variable].vertices(id.config)
    }

    /// Read-only view where the sets fixed by `selection` are singletons.
    pub fn restricted<'a>(&'a self, selection: &'a VertexSelection) -> Restricted<'a> {
        Restricted { net: self, selection }
    }
}

/// Source of vertex lists: a network, or a network under a partial selection.
pub trait LocalSets: Sync {
    fn network(&self) -> &CredalNetwork;
    fn vertices(&self, id: LocalSetId) -> &[Distribution];
}

impl LocalSets for CredalNetwork {
    fn network(&self) -> &CredalNetwork {
        self
    }

    fn vertices(&self, id: LocalSetId) -> &[Distribution] {
        CredalNetwork::vertices(self, id)
    }
}

/// A network seen through a (possibly partial) vertex selection, without copying.
#[derive(Debug, Clone, Copy)]
pub struct Restricted<'a> {
    net: &'a CredalNetwork,
    selection: &'a VertexSelection,
}

impl<'a> Restricted<'a> {
    pub fn selection(&self) -> &VertexSelection {
        self.selection
    }
}

impl LocalSets for Restricted<'_> {
    fn network(&self) -> &CredalNetwork {
        self.net
    }

    fn vertices(&self, id: LocalSetId) -> &[Distribution] {
        let list = self.net.vertices(id);
        match self.selection.get_flat(self.net.flat_index(id)) {
            Some(i) => std::slice::from_ref(&list[i]),
            None => list,
        }
    }
}

/// One vertex index per local set; `None` leaves the set free.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VertexSelection {
    choices: Vec<Option<u32>>,
}

impl VertexSelection {
    /// Selection with every set free.
    pub fn empty(net: &CredalNetwork) -> Self {
        VertexSelection { choices: vec![None; net.local_set_count()] }
    }

    /// Total selection from a closure over every local set.
    pub fn total_from(net: &CredalNetwork, mut pick: impl FnMut(LocalSetId) -> usize) -> Self {
        VertexSelection { choices: net.local_sets().map(|id| Some(pick(id) as u32)).collect() }
    }

    /// Sets `id` to vertex `index`, checking the range.
    pub fn fix(
        &mut self,
        net: &CredalNetwork,
        id: LocalSetId,
        index: usize,
    ) -> Result<(), ModelError> {
        if !net.contains_set(id) {
            return Err(ModelError::UnknownLocalSet(id));
        }
        let len = net.vertices(id).len();
        if index >= len {
            return Err(ModelError::VertexOutOfRange { set: id, index, len });
        }
        self.choices[net.flat_index(id)] = Some(index as u32);
        Ok(())
    }

    pub fn with(mut self, net: &CredalNetwork, id: LocalSetId, index: usize) -> Result<Self, ModelError> {
        self.fix(net, id, index)?;
        Ok(self)
    }

    pub(crate) fn set_flat(&mut self, flat: usize, index: Option<usize>) {
        self.choices[flat] = index.map(|i| i as u32);
    }

    pub fn get(&self, net: &CredalNetwork, id: LocalSetId) -> Option<usize> {
        self.get_flat(net.flat_index(id))
    }

    pub fn get_flat(&self, flat: usize) -> Option<usize> {
        self.choices.get(flat).copied().flatten().map(|i| i as usize)
    }

    pub fn clear(&mut self, net: &CredalNetwork, id: LocalSetId) {
        self.choices[net.flat_index(id)] = None;
    }

    pub fn fixed_count(&self) -> usize {
        self.choices.iter().filter(|c| c.is_some()).count()
    }

    pub fn is_total(&self) -> bool {
        self.choices.iter().all(Option::is_some)
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    /// `(set, vertex)` pairs of the fixed sets.
    pub fn iter<'a>(&'a self, net: &'a CredalNetwork) -> impl Iterator<Item = (LocalSetId, usize)> + 'a {
        self.choices
            .iter()
            .enumerate()
            .filter_map(move |(f, c)| c.map(|i| (net.local_set_at(f), i as usize)))
    }

    /// Checks the selection against `net`.
    pub fn check(&self, net: &CredalNetwork) -> Result<(), ModelError> {
        if self.choices.len() != net.local_set_count() {
            return Err(ModelError::DimensionMismatch {
                expected: net.local_set_count(),
                found: self.choices.len(),
            });
        }
        for (flat, c) in self.choices.iter().enumerate() {
            if let Some(i) = c {
                let id = net.local_set_at(flat);
                let len = net.vertices(id).len();
                if *i as usize >= len {
                    return Err(ModelError::VertexOutOfRange { set: id, index: *i as usize, len });
                }
            }
        }
        Ok(())
    }
}

/// Checks structure and numbers, returning the first violated invariant.
pub fn validate(variables: &[Variable], tables: &[ConditionalCredalTable]) -> Result<(), Violation> {
    let n = variables.len();
    for (i, v) in variables.iter().enumerate() {
        if variables[..i].iter().any(|w| w.name == v.name) {
            return Err(Violation::DuplicateVariable(v.name.clone()));
        }
        if v.categories.is_empty() {
            return Err(Violation::NoCategories(v.name.clone()));
        }
        for (j, c) in v.categories.iter().enumerate() {
            if v.categories[..j].contains(c) {
                return Err(Violation::DuplicateCategory {
                    variable: v.name.clone(),
                    category: c.clone(),
                });
            }
        }
    }
    if tables.len() != n {
        return Err(Violation::TableCount { expected: n, found: tables.len() });
    }
    for (pos, t) in tables.iter().enumerate() {
        if t.child != pos {
            return Err(Violation::TableOrder { position: pos, child: t.child });
        }
        for (k, &p) in t.parents.iter().enumerate() {
            if p >= n {
                return Err(Violation::UnknownParent { variable: variables[pos].name.clone(), parent: p });
            }
            if p == pos || t.parents[..k].contains(&p) {
                return Err(Violation::DuplicateParent {
                    variable: variables[pos].name.clone(),
                    parent: variables[p].name.clone(),
                });
            }
        }
    }

    // Directed cycles: Kahn's algorithm leaves the cycle members unprocessed.
    let mut indegree: Vec<usize> = tables.iter().map(|t| t.parents.len()).collect();
    let mut children = vec![Vec::new(); n];
    for t in tables {
        for &p in &t.parents {
            children[p].push(t.child);
        }
    }
    let mut queue: Vec<VarId> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = queue.pop() {
        seen += 1;
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                queue.push(c);
            }
        }
    }
    if seen < n {
        let culprit = (0..n).find(|&v| indegree[v] > 0).unwrap();
        return Err(Violation::Cycle(variables[culprit].name.clone()));
    }

    // Undirected cycles: union-find over the skeleton.
    let mut uf: Vec<usize> = (0..n).collect();
    fn root(uf: &mut [usize], mut x: usize) -> usize {
        while uf[x] != x {
            uf[x] = uf[uf[x]];
            x = uf[x];
        }
        x
    }
    for t in tables {
        for &p in &t.parents {
            let (a, b) = (root(&mut uf, p), root(&mut uf, t.child));
            if a == b {
                return Err(Violation::NotPolytree {
                    parent: variables[p].name.clone(),
                    child: variables[t.child].name.clone(),
                });
            }
            uf[a] = b;
        }
    }

    for (pos, t) in tables.iter().enumerate() {
        let name = &variables[pos].name;
        let expected: usize = t.parents.iter().map(|&p| variables[p].cardinality()).product();
        if t.sets.len() != expected {
            return Err(Violation::MissingConfiguration {
                variable: name.clone(),
                expected,
                found: t.sets.len(),
            });
        }
        let card = variables[pos].cardinality();
        for (config, list) in t.sets.iter().enumerate() {
            if list.is_empty() {
                return Err(Violation::EmptyVertexList { variable: name.clone(), config });
            }
            for (row, d) in list.iter().enumerate() {
                let bad = |reason: String| Violation::BadVertex {
                    variable: name.clone(),
                    config,
                    row,
                    reason,
                };
                if d.len() != card {
                    return Err(bad(format!("has {} entries, expected {card}", d.len())));
                }
                if let Err(e) = Distribution::new(d.probs().to_vec()) {
                    return Err(bad(e.to_string()));
                }
            }
        }
    }
    Ok(())
}

/// Number of points of the strong extension: the product of all vertex-list sizes.
pub fn count_potential_vertices(sets: &dyn LocalSets) -> BigUint {
    let net = sets.network();
    net.local_sets().fold(BigUint::from(1u32), |acc, id| acc * BigUint::from(sets.vertices(id).len()))
}

/// Componentwise `[min, max]` over the vertices.
pub fn interval_projection(vertices: &[Distribution]) -> Result<IntervalPotential, ModelError> {
    project_points(vertices.iter().map(Distribution::probs))
}

pub(crate) fn project_points<'a>(
    mut points: impl Iterator<Item = &'a [f64]>,
) -> Result<IntervalPotential, ModelError> {
    let first = points.next().ok_or(ModelError::EmptyVertexList)?;
    let mut lower = first.to_vec();
    let mut upper = first.to_vec();
    for p in points {
        if p.len() != lower.len() {
            return Err(ModelError::DimensionMismatch { expected: lower.len(), found: p.len() });
        }
        for (j, &x) in p.iter().enumerate() {
            lower[j] = lower[j].min(x);
            upper[j] = upper[j].max(x);
        }
    }
    Ok(IntervalPotential::from_bounds(&lower, &upper))
}

/// Copy of `net` where every fixed set holds only its chosen vertex.
pub fn restrict(net: &CredalNetwork, selection: &VertexSelection) -> Result<CredalNetwork, ModelError> {
    selection.check(net)?;
    let mut out = net.clone();
    for (id, index) in selection.iter(net) {
        let keep = out.tables[id.variable].sets[id.config][index].clone();
        out.tables[id.variable].sets[id.config] = vec![keep];
    }
    Ok(out)
}

/// Lower and upper expectation of `f` over the credal set spanned by `vertices`.
pub fn expectation_bounds(vertices: &[Distribution], f: &[f64]) -> Result<(f64, f64), ModelError> {
    if vertices.is_empty() {
        return Err(ModelError::EmptyVertexList);
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in vertices {
        if v.len() != f.len() {
            return Err(ModelError::DimensionMismatch { expected: f.len(), found: v.len() });
        }
        let e: f64 = v.probs().iter().zip(f).map(|(p, x)| p * x).sum();
        lo = lo.min(e);
        hi = hi.max(e);
    }
    Ok((lo, hi))
}

/// Mixed-radix encoding, first digit most significant.
pub fn encode_config(digits: &[usize], radices: &[usize]) -> usize {
    digits.iter().zip(radices).fold(0, |acc, (&d, &r)| acc * r + d)
}

/// Inverse of [`encode_config`].
pub fn decode_config(mut index: usize, radices: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; radices.len()];
    for k in (0..radices.len()).rev() {
        digits[k] = index % radices[k];
        index /= radices[k];
    }
    digits
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(p: &[f64]) -> Distribution {
        Distribution::new(p.to_vec()).unwrap()
    }

    fn chain_xy(vertices: usize) -> CredalNetwork {
        let list = |n: usize| (0..n).map(|i| d(&[0.1 + 0.2 * i as f64, 0.9 - 0.2 * i as f64])).collect::<Vec<_>>();
        CredalNetwork::new(
            vec![Variable::with_cardinality("X", 2), Variable::with_cardinality("Y", 2)],
            vec![
                ConditionalCredalTable::root(0, list(vertices)),
                ConditionalCredalTable::new(1, vec![0], vec![list(vertices), list(vertices)]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn single_category_root_is_valid() {
        let vars = vec![Variable::new("A", vec!["a".into()])];
        let tables = vec![ConditionalCredalTable::root(0, vec![d(&[1.0])])];
        assert_eq!(validate(&vars, &tables), Ok(()));
    }

    fn binary_tables(edges: &[(usize, usize)], n: usize) -> (Vec<Variable>, Vec<ConditionalCredalTable>) {
        let vars: Vec<_> = (0..n).map(|i| Variable::with_cardinality(format!("V{i}"), 2)).collect();
        let tables = (0..n)
            .map(|c| {
                let parents: Vec<_> = edges.iter().filter(|e| e.1 == c).map(|e| e.0).collect();
                let configs = 1 << parents.len();
                ConditionalCredalTable::new(c, parents, vec![vec![d(&[0.5, 0.5])]; configs])
            })
            .collect();
        (vars, tables)
    }

    #[test]
    fn directed_cycle_is_rejected() {
        let (v, t) = binary_tables(&[(0, 1), (1, 2), (2, 0)], 3);
        assert!(matches!(validate(&v, &t), Err(Violation::Cycle(_))));
    }

    #[test]
    fn diamond_is_not_a_polytree() {
        let (v, t) = binary_tables(&[(0, 1), (0, 2), (1, 3), (2, 3)], 4);
        assert!(matches!(validate(&v, &t), Err(Violation::NotPolytree { .. })));
    }

    #[test]
    fn missing_configuration_and_bad_rows() {
        let (v, mut t) = binary_tables(&[(0, 1)], 2);
        t[1] = ConditionalCredalTable::new(1, vec![0], vec![vec![d(&[0.5, 0.5])]]);
        assert!(matches!(validate(&v, &t), Err(Violation::MissingConfiguration { .. })));
        let (v, mut t) = binary_tables(&[(0, 1)], 2);
        t[1] = ConditionalCredalTable::new(
            1,
            vec![0],
            vec![vec![d(&[0.5, 0.5])], vec![Distribution::from_vec_unchecked(vec![0.5, 0.4])]],
        );
        match validate(&v, &t) {
            Err(Violation::BadVertex { config: 1, row: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn distribution_tolerance_rejects_instead_of_renormalizing() {
        assert!(Distribution::new(vec![0.5, 0.5 + 5e-10]).is_ok());
        assert!(matches!(Distribution::new(vec![0.5, 0.4]), Err(ModelError::NotNormalized { .. })));
        assert!(matches!(Distribution::new(vec![-0.1, 1.1]), Err(ModelError::EntryOutOfRange { .. })));
    }

    #[test]
    fn duplicates_are_dropped_on_load() {
        let t = ConditionalCredalTable::root(0, vec![d(&[0.3, 0.7]), d(&[0.3, 0.7]), d(&[0.6, 0.4])]);
        assert_eq!(t.vertices(0).len(), 2);
    }

    #[test]
    fn potential_vertex_counts() {
        assert_eq!(count_potential_vertices(&chain_xy(2)), BigUint::from(8u32));
        assert_eq!(count_potential_vertices(&chain_xy(1)), BigUint::from(1u32));

        // X -> Y <- Z, four categories and four vertices everywhere.
        let four = |name: &str| Variable::with_cardinality(name, 4);
        let list: Vec<Distribution> = (0..4).map(|i| Distribution::point_mass(4, i)).collect();
        let net = CredalNetwork::new(
            vec![four("X"), four("Y"), four("Z")],
            vec![
                ConditionalCredalTable::root(0, list.clone()),
                ConditionalCredalTable::new(1, vec![0, 2], vec![list.clone(); 16]),
                ConditionalCredalTable::root(2, list),
            ],
        )
        .unwrap();
        let count = count_potential_vertices(&net);
        assert_eq!(count, BigUint::from(4u32).pow(18));
        assert_eq!(count, BigUint::from(68_719_476_736u64));
    }

    #[test]
    fn projection_examples() {
        let p = interval_projection(&[d(&[0.2, 0.8]), d(&[0.5, 0.5])]).unwrap();
        assert_eq!(p, IntervalPotential::from_bounds(&[0.2, 0.5], &[0.5, 0.8]));
        let p = interval_projection(&[d(&[0.3, 0.7])]).unwrap();
        assert_eq!(p, IntervalPotential::from_bounds(&[0.3, 0.7], &[0.3, 0.7]));
        let simplex: Vec<_> = (0..3).map(|i| Distribution::point_mass(3, i)).collect();
        let p = interval_projection(&simplex).unwrap();
        assert_eq!(p, IntervalPotential::from_bounds(&[0.0; 3], &[1.0; 3]));
        assert_eq!(interval_projection(&[]), Err(ModelError::EmptyVertexList));
    }

    #[test]
    fn restrict_counts() {
        let net = chain_xy(2);
        let total = VertexSelection::total_from(&net, |_| 1);
        assert_eq!(count_potential_vertices(&restrict(&net, &total).unwrap()), BigUint::from(1u32));
        let empty = VertexSelection::empty(&net);
        assert_eq!(restrict(&net, &empty).unwrap(), net);
        let partial = empty.with(&net, LocalSetId::new(1, 1), 0).unwrap();
        assert_eq!(count_potential_vertices(&restrict(&net, &partial).unwrap()), BigUint::from(4u32));
        // The borrowed view agrees with the copy.
        assert_eq!(count_potential_vertices(&net.restricted(&partial)), BigUint::from(4u32));
        let mut bad = VertexSelection::empty(&net);
        assert!(matches!(bad.fix(&net, LocalSetId::new(0, 0), 7), Err(ModelError::VertexOutOfRange { .. })));
    }

    #[test]
    fn expectation_examples() {
        let set = [d(&[0.2, 0.8]), d(&[0.5, 0.5])];
        let (lo, hi) = expectation_bounds(&set, &[0.0, 10.0]).unwrap();
        assert!((lo - 5.0).abs() < 1e-12 && (hi - 8.0).abs() < 1e-12);
        let (lo, hi) = expectation_bounds(&set, &[3.0, 3.0]).unwrap();
        assert!((lo - 3.0).abs() < 1e-12 && (hi - 3.0).abs() < 1e-12);
        assert!(expectation_bounds(&set, &[1.0]).is_err());
    }

    #[test]
    fn config_codec_is_most_significant_first() {
        assert_eq!(encode_config(&[1, 0, 2], &[2, 3, 4]), 12 + 2);
        assert_eq!(decode_config(14, &[2, 3, 4]), vec![1, 0, 2]);
    }

    #[test]
    fn flat_indices_round_trip() {
        let net = chain_xy(2);
        for (flat, id) in net.local_sets().enumerate() {
            assert_eq!(net.flat_index(id), flat);
            assert_eq!(net.local_set_at(flat), id);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn credal_set() -> impl Strategy<Value = Vec<Distribution>> {
            (2usize..5).prop_flat_map(|k| {
                prop::collection::vec(prop::collection::vec(0.01f64..1.0, k), 1..6).prop_map(|rows| {
                    rows.into_iter()
                        .map(|r| {
                            let s: f64 = r.iter().sum();
                            Distribution::from_vec_unchecked(r.iter().map(|x| x / s).collect())
                        })
                        .collect()
                })
            })
        }

        proptest! {
            #[test]
            fn indicator_expectation_matches_projection(set in credal_set()) {
                let proj = interval_projection(&set).unwrap();
                for j in 0..proj.len() {
                    let mut f = vec![0.0; proj.len()];
                    f[j] = 1.0;
                    let (lo, hi) = expectation_bounds(&set, &f).unwrap();
                    prop_assert_eq!(lo, proj[j].lower);
                    prop_assert_eq!(hi, proj[j].upper);
                }
            }

            #[test]
            fn projection_brackets_one(set in credal_set()) {
                let proj = interval_projection(&set).unwrap();
                prop_assert!(proj.lower_sum() <= 1.0 + 1e-12);
                prop_assert!(proj.upper_sum() >= 1.0 - 1e-12);
            }
        }
    }
}
