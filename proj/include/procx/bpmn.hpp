#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "procx/corpus.hpp"

namespace procx::bpmn {

enum class NodeKind { task, xor_gateway, and_gateway, start_event, end_event, data_object };
std::string_view to_string(NodeKind kind);

struct Lane {
    std::string id;
    std::string actor_entity_id; // empty for the unassigned lane
    std::string label;

    bool operator==(const Lane&) const = default;
};

struct Node {
    std::string id;
    NodeKind kind = NodeKind::task;
    std::string label;
    std::optional<std::string> lane_id; // unset for data objects

    bool operator==(const Node&) const = default;
};

struct SequenceFlow {
    std::string id;
    std::string source;
    std::string target;
    std::optional<std::string> condition_label;

    bool operator==(const SequenceFlow&) const = default;
};

struct MessageFlow {
    std::string id;
    std::string source;
    std::string target;

    bool operator==(const MessageFlow&) const = default;
};

enum class Direction { input, output };

struct DataAssociation {
    std::string id;
    std::string data_object;
    std::string task;
    Direction direction = Direction::input;

    bool operator==(const DataAssociation&) const = default;
};

struct ProcessGraph {
    std::vector<Lane> lanes;
    std::vector<Node> nodes;
    std::vector<SequenceFlow> sequence_flows;
    std::vector<MessageFlow> message_flows;
    std::vector<DataAssociation> data_associations;

    bool operator==(const ProcessGraph&) const = default;

    const Node* find_node(std::string_view id) const;
    const Lane* find_lane(std::string_view id) const;
    // Empty iff endpoints resolve, flows respect lanes and there is exactly one start and >= 1 end event.
    std::vector<std::string> validate() const;
};

inline constexpr std::string_view kUnassignedLabel = "unassigned";

// Conditions are attached to their nearest preceding gateway, gateway mentions of one
// decision point are merged into one entity, and every activity without a performer gets
// the closest actor mention to its left. Idempotent.
Document consolidate(const Document& doc, const SchemaDescriptor& schema);

struct VertexStage {
    ProcessGraph graph; // lanes and nodes only
    std::map<std::string, std::string> node_of_mention;
};

// Expects a consolidated document.
VertexStage build_vertices(const Document& doc, const SchemaDescriptor& schema);

struct LinkResult {
    ProcessGraph graph;
    std::vector<std::string> warnings;
};

LinkResult link(const VertexStage& stage, const Document& doc, const SchemaDescriptor& schema);

struct Bounds {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;

    bool operator==(const Bounds&) const = default;
};

struct LayoutedModel {
    ProcessGraph graph;
    std::map<std::string, Bounds> positions;   // node id
    std::map<std::string, Bounds> lane_bounds; // lane id
    Bounds pool;

    bool operator==(const LayoutedModel&) const = default;
};

inline constexpr int kColumnWidth = 150;
inline constexpr int kLaneHeight = 120;
inline constexpr int kPoolHeaderWidth = 30;

LayoutedModel layout(const ProcessGraph& graph);

std::string serialize_bpmn(const LayoutedModel& model);
// Throws LoadError on XML that this serializer could not have produced.
LayoutedModel parse_bpmn(const std::string& xml);

struct GeneratedModel {
    LayoutedModel model;
    std::string xml;
    std::vector<std::string> warnings;
};

// consolidate -> build_vertices -> link -> layout -> serialize.
GeneratedModel generate(const Document& doc, const SchemaDescriptor& schema);

} // namespace procx::bpmn
