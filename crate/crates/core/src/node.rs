//! Nodes, resource records, missed-call registration and agent installation.

use std::fmt;

use thiserror::Error;

use crate::bob::{
    favorable_observations, generate_belief, identify_behaviors, Belief, BeliefRecord, BobError,
    CognitiveConfig, ObservationStorage, ParameterLog, Provenance, RecordEntry, RecordKey,
};
use crate::ids::NodeId;
use crate::metrics::{StageCostModel, TbfBreakdown};
use crate::mobility::{Vec2, Waypoint};
use crate::time::{SimDuration, SimTime};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NodeError {
    #[error("{0} is not a navigation controller and cannot register devices")]
    WrongAuthority(NodeId),
    #[error("{0} is not registered")]
    NotRegistered(NodeId),
    #[error("resource {0} already attached")]
    DuplicateResource(u32),
    #[error("registration of {device}: cannot go from {from:?} via {step}")]
    InvalidTransition {
        device: NodeId,
        from: RegistrationState,
        step: &'static str,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeClass {
    RescueTeam,
    Bystander,
    NavigationController,
    VehicleController,
    RescueVehicle,
    SurvivedInfrastructure,
}

impl NodeClass {
    pub const COUNT: usize = 6;
    pub const ALL: [NodeClass; 6] = [
        NodeClass::RescueTeam,
        NodeClass::Bystander,
        NodeClass::NavigationController,
        NodeClass::VehicleController,
        NodeClass::RescueVehicle,
        NodeClass::SurvivedInfrastructure,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_mobile(self) -> bool {
        matches!(
            self,
            NodeClass::RescueTeam | NodeClass::Bystander | NodeClass::RescueVehicle
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            NodeClass::RescueTeam => "rescue_team",
            NodeClass::Bystander => "bystander",
            NodeClass::NavigationController => "navigation_controller",
            NodeClass::VehicleController => "vehicle_controller",
            NodeClass::RescueVehicle => "rescue_vehicle",
            NodeClass::SurvivedInfrastructure => "survived_infrastructure",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl fmt::Display for NodeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ResourceType {
    Memory,
    Processor,
    CommunicationChannel,
    SoftwareService,
    Sensor,
    Camera,
}

impl ResourceType {
    pub const COUNT: usize = 6;
    pub const ALL: [ResourceType; 6] = [
        ResourceType::Memory,
        ResourceType::Processor,
        ResourceType::CommunicationChannel,
        ResourceType::SoftwareService,
        ResourceType::Sensor,
        ResourceType::Camera,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ResourceType::Memory => "memory",
            ResourceType::Processor => "processor",
            ResourceType::CommunicationChannel => "communication_channel",
            ResourceType::SoftwareService => "software_service",
            ResourceType::Sensor => "sensor",
            ResourceType::Camera => "camera",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.name() == s)
    }
}

impl fmt::Display for ResourceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Set of resource types as a bitmask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct ResourceSet(u8);

impl ResourceSet {
    pub const EMPTY: ResourceSet = ResourceSet(0);

    pub fn from_bits(bits: u8) -> Self {
        ResourceSet(bits & 0b11_1111)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn insert(&mut self, t: ResourceType) {
        self.0 |= 1 << t.index();
    }

    pub fn contains(self, t: ResourceType) -> bool {
        self.0 & (1 << t.index()) != 0
    }

    pub fn intersection(self, other: ResourceSet) -> ResourceSet {
        ResourceSet(self.0 & other.0)
    }

    pub fn union(self, other: ResourceSet) -> ResourceSet {
        ResourceSet(self.0 | other.0)
    }

    pub fn intersects(self, other: ResourceSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = ResourceType> {
        ResourceType::ALL
            .into_iter()
            .filter(move |t| self.contains(*t))
    }
}

impl FromIterator<ResourceType> for ResourceSet {
    fn from_iter<I: IntoIterator<Item = ResourceType>>(iter: I) -> Self {
        let mut s = ResourceSet::EMPTY;
        for t in iter {
            s.insert(t);
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Resource {
    pub id: u32,
    pub kind: ResourceType,
    /// Remaining capacity.
    pub capacity: f64,
    /// Capacity at attachment.
    pub initial: f64,
    /// Share of `initial` consumed per simulated second.
    pub drain_rate: f64,
}

impl Resource {
    pub fn new(id: u32, kind: ResourceType, capacity: f64) -> Self {
        Self {
            id,
            kind,
            capacity,
            initial: capacity,
            drain_rate: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResourceRecord {
    pub node: NodeId,
    resources: Vec<Resource>,
}

impl ResourceRecord {
    pub fn new(node: NodeId) -> Self {
        Self {
            node,
            resources: Vec::new(),
        }
    }

    pub fn attach_resource(&mut self, resource: Resource) -> Result<(), NodeError> {
        if self.resources.iter().any(|r| r.id == resource.id) {
            return Err(NodeError::DuplicateResource(resource.id));
        }
        self.resources.push(resource);
        Ok(())
    }

    pub fn resources(&self) -> &[Resource] {
        &self.resources
    }

    pub fn len(&self) -> usize {
        self.resources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resources.is_empty()
    }

    /// Remaining/initial capacity aggregated over all resources of a type held.
    pub fn availability(&self, kind: ResourceType) -> Option<f64> {
        let (mut rem, mut init) = (0.0, 0.0);
        let mut held = false;
        for r in self.resources.iter().filter(|r| r.kind == kind) {
            held = true;
            rem += r.capacity;
            init += r.initial;
        }
        held.then(|| if init > 0.0 { rem / init } else { 0.0 })
    }

    /// Types held whose availability fell below `threshold`.
    pub fn in_demand(&self, threshold: f64) -> ResourceSet {
        ResourceType::ALL
            .into_iter()
            .filter(|&t| self.availability(t).is_some_and(|a| a < threshold))
            .collect()
    }

    /// Types this record can lend: held, non-empty and not in demand itself.
    pub fn offers(&self, threshold: f64) -> ResourceSet {
        ResourceType::ALL
            .into_iter()
            .filter(|&t| {
                self.availability(t)
                    .is_some_and(|a| a > 0.0 && a >= threshold)
            })
            .collect()
    }

    /// Tops up every resource of the given types to `level` × initial.
    pub fn replenish(&mut self, kinds: ResourceSet, level: f64) {
        for r in self.resources.iter_mut().filter(|r| kinds.contains(r.kind)) {
            r.capacity = r.capacity.max(r.initial * level);
        }
    }

    /// Linear consumption over `dt`.
    pub fn drain(&mut self, dt: SimDuration) {
        let secs = dt.as_secs_f64();
        for r in &mut self.resources {
            r.capacity = (r.capacity - r.initial * r.drain_rate * secs).max(0.0);
        }
    }
}

/// Proactive wish-list of a node: resource types running low.
pub fn demand_scan(node: &Node, threshold: f64) -> ResourceSet {
    if !node.registered {
        return ResourceSet::EMPTY;
    }
    node.resources.in_demand(threshold)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegistrationState {
    Idle,
    Dialed,
    RingsSent,
    Validated,
    Registered,
    Denied,
}

/// Missed-call registration: dial, two rings, automatic disconnect, validation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegistrationSession {
    pub device: NodeId,
    pub state: RegistrationState,
    pub ring_count: u8,
}

impl RegistrationSession {
    pub const RINGS: u8 = 2;

    pub fn new(device: NodeId) -> Self {
        Self {
            device,
            state: RegistrationState::Idle,
            ring_count: 0,
        }
    }

    fn bad(&self, step: &'static str) -> NodeError {
        NodeError::InvalidTransition {
            device: self.device,
            from: self.state,
            step,
        }
    }

    pub fn dial(&mut self) -> Result<(), NodeError> {
        if self.state != RegistrationState::Idle {
            return Err(self.bad("dial"));
        }
        self.state = RegistrationState::Dialed;
        Ok(())
    }

    /// One ring; the call disconnects itself after the second.
    pub fn ring(&mut self) -> Result<(), NodeError> {
        if self.state != RegistrationState::Dialed {
            return Err(self.bad("ring"));
        }
        self.ring_count += 1;
        if self.ring_count == Self::RINGS {
            self.state = RegistrationState::RingsSent;
        }
        Ok(())
    }

    pub fn validate(&mut self, valid: bool) -> Result<(), NodeError> {
        if self.state != RegistrationState::RingsSent {
            return Err(self.bad("validate"));
        }
        self.state = if valid {
            RegistrationState::Validated
        } else {
            RegistrationState::Denied
        };
        Ok(())
    }

    pub fn confirm(&mut self) -> Result<(), NodeError> {
        if self.state != RegistrationState::Validated {
            return Err(self.bad("confirm"));
        }
        self.state = RegistrationState::Registered;
        Ok(())
    }

    fn already_registered(device: NodeId) -> Self {
        Self {
            device,
            state: RegistrationState::Registered,
            ring_count: Self::RINGS,
        }
    }
}

/// When and at what modeled cost the agent last formed its self-belief.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FormationInfo {
    pub at: SimTime,
    pub timing: TbfBreakdown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Formation {
    pub belief: Belief,
    pub provenance: Provenance,
    pub timing: TbfBreakdown,
}

/// Mobile cognitive agent state installed on a registered node.
#[derive(Clone, Debug, PartialEq)]
pub struct McaState {
    pub origin_authority: NodeId,
    pub belief_record: BeliefRecord,
    pub parameter_log: ParameterLog,
    pub observation_storage: ObservationStorage,
    pub installed_at: SimTime,
    formations: u64,
    last_formation: Option<FormationInfo>,
}

impl McaState {
    pub fn new(origin_authority: NodeId, config: &CognitiveConfig, now: SimTime) -> Self {
        Self {
            origin_authority,
            belief_record: BeliefRecord::new(config.record_refresh),
            parameter_log: ParameterLog::starting_at(config.log_refresh, now),
            observation_storage: ObservationStorage::default(),
            installed_at: now,
            formations: 0,
            last_formation: None,
        }
    }

    /// Records the favorable observations supported by the current log.
    pub fn observe(&mut self, config: &CognitiveConfig) {
        let behaviors = identify_behaviors(&self.parameter_log, config);
        for ob in favorable_observations(&behaviors, config) {
            self.observation_storage.push(ob.id);
        }
    }

    /// Runs the whole pipeline and stores the result as the self-belief.
    /// Ends the observation session whether or not a belief was formed.
    pub fn form_self_belief(
        &mut self,
        owner: NodeId,
        now: SimTime,
        config: &CognitiveConfig,
        costs: &StageCostModel,
    ) -> Result<Formation, BobError> {
        let result = self.try_form(owner, now, config, costs);
        self.observation_storage.clear();
        self.parameter_log.refresh_if_due(now);
        result
    }

    fn try_form(
        &mut self,
        owner: NodeId,
        now: SimTime,
        config: &CognitiveConfig,
        costs: &StageCostModel,
    ) -> Result<Formation, BobError> {
        if self.parameter_log.is_empty() || self.parameter_log.len() < config.min_samples {
            return Err(BobError::EmptyLog);
        }
        let behaviors = identify_behaviors(&self.parameter_log, config);
        for ob in favorable_observations(&behaviors, config) {
            self.observation_storage.push(ob.id);
        }
        let observations = self.observation_storage.summarize();
        let belief = generate_belief(&observations, config, now)?;
        let timing = costs.self_belief_time(
            &self.parameter_log.capture_counts(),
            behaviors.len(),
            observations.len(),
        );
        self.formations += 1;
        let provenance = Provenance {
            origin: owner,
            seq: self.formations,
        };
        self.belief_record
            .update(RecordKey::Host, belief, now, provenance);
        self.last_formation = Some(FormationInfo { at: now, timing });
        Ok(Formation {
            belief,
            provenance,
            timing,
        })
    }

    /// The self-belief if it was formed within the record's refresh period.
    pub fn current_self_belief(&self, now: SimTime) -> Option<&RecordEntry> {
        self.belief_record
            .host()
            .filter(|e| now.since(e.belief.generated_at) <= self.belief_record.refresh_period())
    }

    /// Cost of the last formation if it happened within the current session.
    pub fn fresh_formation(&self, now: SimTime, session: SimDuration) -> Option<FormationInfo> {
        self.last_formation.filter(|f| now.since(f.at) < session)
    }

    pub fn last_formation(&self) -> Option<FormationInfo> {
        self.last_formation
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub class: NodeClass,
    pub mobile: bool,
    pub comm_range: f64,
    pub position: Vec2,
    pub registered: bool,
    pub mca: Option<McaState>,
    pub resources: ResourceRecord,
    /// Movement predictability reported as the mobility-pattern parameter.
    pub predictability: f64,
    pub motion: Option<Waypoint>,
}

impl Node {
    pub fn new(id: NodeId, class: NodeClass, comm_range: f64, position: Vec2) -> Self {
        Self {
            id,
            class,
            mobile: class.is_mobile(),
            comm_range,
            position,
            registered: false,
            mca: None,
            resources: ResourceRecord::new(id),
            predictability: if class.is_mobile() { 0.5 } else { 1.0 },
            motion: None,
        }
    }

    /// A navigation controller is its own registration authority.
    pub fn bootstrap_authority(
        &mut self,
        config: &CognitiveConfig,
        now: SimTime,
    ) -> Result<(), NodeError> {
        if self.class != NodeClass::NavigationController {
            return Err(NodeError::WrongAuthority(self.id));
        }
        if !self.registered {
            self.registered = true;
            self.mca = Some(McaState::new(self.id, config, now));
        }
        Ok(())
    }

    pub fn speed(&self) -> f64 {
        match &self.motion {
            Some(w) if self.mobile && w.pause_left <= 0.0 => w.speed,
            _ => 0.0,
        }
    }
}

/// Missed-call registration of `device` with `authority`.
///
/// Registering an already-registered device is a no-op that reports the
/// registered state.
pub fn register_device(
    device: &mut Node,
    authority: &Node,
    valid: bool,
    config: &CognitiveConfig,
    now: SimTime,
) -> Result<RegistrationSession, NodeError> {
    if authority.class != NodeClass::NavigationController {
        return Err(NodeError::WrongAuthority(authority.id));
    }
    if device.registered {
        return Ok(RegistrationSession::already_registered(device.id));
    }
    let mut session = RegistrationSession::new(device.id);
    session.dial()?;
    session.ring()?;
    session.ring()?;
    session.validate(valid)?;
    if session.state == RegistrationState::Denied {
        return Ok(session);
    }
    session.confirm()?;
    device.registered = true;
    clone_mca(authority, device, config, now)?;
    Ok(session)
}

/// Installs a fresh copy of the authority's agent on a registered node.
pub fn clone_mca<'a>(
    authority: &Node,
    target: &'a mut Node,
    config: &CognitiveConfig,
    now: SimTime,
) -> Result<&'a mut McaState, NodeError> {
    if authority.class != NodeClass::NavigationController {
        return Err(NodeError::WrongAuthority(authority.id));
    }
    if !target.registered {
        return Err(NodeError::NotRegistered(target.id));
    }
    Ok(target.mca.insert(McaState::new(authority.id, config, now)))
}
