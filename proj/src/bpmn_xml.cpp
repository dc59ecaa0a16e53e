#include <algorithm>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "procx/bpmn.hpp"
#include "procx/error.hpp"

namespace procx::bpmn {

namespace {

constexpr std::string_view kExtensionNs = "urn:procx:bpmn-extension";

std::string esc(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string_view tag_of(NodeKind kind) {
    switch (kind) {
        case NodeKind::task: return "bpmn:task";
        case NodeKind::xor_gateway: return "bpmn:exclusiveGateway";
        case NodeKind::and_gateway: return "bpmn:parallelGateway";
        case NodeKind::start_event: return "bpmn:startEvent";
        case NodeKind::end_event: return "bpmn:endEvent";
        case NodeKind::data_object: return "bpmn:dataObjectReference";
    }
    return "";
}

std::string suffix_of(const std::string& id) {
    auto p = id.find('_');
    return p == std::string::npos ? id : id.substr(p + 1);
}

std::string data_object_id(const std::string& reference_id) { return "DataObject_" + suffix_of(reference_id); }
std::string property_id(const std::string& task_id) { return "Property_" + suffix_of(task_id); }

void bounds(std::ostream& o, const Bounds& b) {
    o << "<dc:Bounds x=\"" << b.x << "\" y=\"" << b.y << "\" width=\"" << b.width << "\" height=\"" << b.height
      << "\"/>";
}

void waypoint(std::ostream& o, int x, int y) { o << "        <di:waypoint x=\"" << x << "\" y=\"" << y << "\"/>\n"; }

} // namespace

std::string serialize_bpmn(const LayoutedModel& model) {
    const auto& g = model.graph;
    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<bpmn:definitions xmlns:bpmn=\"http://www.omg.org/spec/BPMN/20100524/MODEL\""
      << " xmlns:bpmndi=\"http://www.omg.org/spec/BPMN/20100524/DI\""
      << " xmlns:dc=\"http://www.omg.org/spec/DD/20100524/DC\""
      << " xmlns:di=\"http://www.omg.org/spec/DD/20100524/DI\""
      << " xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\""
      << " xmlns:procx=\"" << kExtensionNs << "\""
      << " id=\"Definitions_1\" targetNamespace=\"urn:procx\" exporter=\"procx\" exporterVersion=\"" << PROCX_VERSION
      << "\">\n";

    o << "  <bpmn:collaboration id=\"Collaboration_1\">\n"
      << "    <bpmn:participant id=\"Participant_1\" name=\"Process\" processRef=\"Process_1\"/>\n";
    for (const auto& f : g.message_flows) {
        o << "    <bpmn:messageFlow id=\"" << esc(f.id) << "\" sourceRef=\"" << esc(f.source) << "\" targetRef=\""
          << esc(f.target) << "\"/>\n";
    }
    o << "  </bpmn:collaboration>\n";

    o << "  <bpmn:process id=\"Process_1\" isExecutable=\"false\">\n"
      << "    <bpmn:laneSet id=\"LaneSet_1\">\n";
    for (const auto& lane : g.lanes) {
        o << "      <bpmn:lane id=\"" << esc(lane.id) << "\" name=\"" << esc(lane.label) << "\"";
        if (!lane.actor_entity_id.empty()) o << " procx:actorEntity=\"" << esc(lane.actor_entity_id) << "\"";
        o << ">\n";
        for (const auto& n : g.nodes) {
            if (n.lane_id == lane.id) o << "        <bpmn:flowNodeRef>" << esc(n.id) << "</bpmn:flowNodeRef>\n";
        }
        o << "      </bpmn:lane>\n";
    }
    o << "    </bpmn:laneSet>\n";

    for (const auto& n : g.nodes) {
        if (n.kind == NodeKind::data_object) {
            o << "    <bpmn:dataObject id=\"" << esc(data_object_id(n.id)) << "\"/>\n"
              << "    <bpmn:dataObjectReference id=\"" << esc(n.id) << "\" name=\"" << esc(n.label)
              << "\" dataObjectRef=\"" << esc(data_object_id(n.id)) << "\"/>\n";
            continue;
        }
        std::vector<const DataAssociation*> assocs;
        for (const auto& a : g.data_associations) {
            if (a.task == n.id) assocs.push_back(&a);
        }
        o << "    <" << tag_of(n.kind) << " id=\"" << esc(n.id) << "\" name=\"" << esc(n.label) << "\"";
        if (assocs.empty()) {
            o << "/>\n";
            continue;
        }
        o << ">\n";
        bool any_input = std::any_of(assocs.begin(), assocs.end(), [](auto* a) { return a->direction == Direction::input; });
        if (any_input) {
            o << "      <bpmn:property id=\"" << esc(property_id(n.id)) << "\" name=\"__targetRef_placeholder\"/>\n";
        }
        for (const auto* a : assocs) {
            if (a->direction == Direction::input) {
                o << "      <bpmn:dataInputAssociation id=\"" << esc(a->id) << "\">\n"
                  << "        <bpmn:sourceRef>" << esc(a->data_object) << "</bpmn:sourceRef>\n"
                  << "        <bpmn:targetRef>" << esc(property_id(n.id)) << "</bpmn:targetRef>\n"
                  << "      </bpmn:dataInputAssociation>\n";
            } else {
                o << "      <bpmn:dataOutputAssociation id=\"" << esc(a->id) << "\">\n"
                  << "        <bpmn:targetRef>" << esc(a->data_object) << "</bpmn:targetRef>\n"
                  << "      </bpmn:dataOutputAssociation>\n";
            }
        }
        o << "    </" << tag_of(n.kind) << ">\n";
    }

    for (const auto& f : g.sequence_flows) {
        o << "    <bpmn:sequenceFlow id=\"" << esc(f.id) << "\"";
        if (f.condition_label) o << " name=\"" << esc(*f.condition_label) << "\"";
        o << " sourceRef=\"" << esc(f.source) << "\" targetRef=\"" << esc(f.target) << "\"";
        if (f.condition_label) {
            o << ">\n      <bpmn:conditionExpression xsi:type=\"bpmn:tFormalExpression\">" << esc(*f.condition_label)
              << "</bpmn:conditionExpression>\n    </bpmn:sequenceFlow>\n";
        } else {
            o << "/>\n";
        }
    }
    o << "  </bpmn:process>\n";

    // Diagram interchange.
    o << "  <bpmndi:BPMNDiagram id=\"BPMNDiagram_1\">\n"
      << "    <bpmndi:BPMNPlane id=\"BPMNPlane_1\" bpmnElement=\"Collaboration_1\">\n";
    auto shape = [&](const std::string& id, const Bounds& b, bool horizontal) {
        o << "      <bpmndi:BPMNShape id=\"" << esc(id) << "_di\" bpmnElement=\"" << esc(id) << "\"";
        if (horizontal) o << " isHorizontal=\"true\"";
        o << ">\n        ";
        bounds(o, b);
        o << "\n      </bpmndi:BPMNShape>\n";
    };
    shape("Participant_1", model.pool, true);
    for (const auto& lane : g.lanes) {
        auto it = model.lane_bounds.find(lane.id);
        shape(lane.id, it == model.lane_bounds.end() ? Bounds{} : it->second, true);
    }
    for (const auto& n : g.nodes) {
        auto it = model.positions.find(n.id);
        shape(n.id, it == model.positions.end() ? Bounds{} : it->second, false);
    }
    auto pos = [&](const std::string& id) {
        auto it = model.positions.find(id);
        return it == model.positions.end() ? Bounds{} : it->second;
    };
    auto edge = [&](const std::string& id, std::pair<int, int> a, std::pair<int, int> b) {
        o << "      <bpmndi:BPMNEdge id=\"" << esc(id) << "_di\" bpmnElement=\"" << esc(id) << "\">\n";
        waypoint(o, a.first, a.second);
        waypoint(o, b.first, b.second);
        o << "      </bpmndi:BPMNEdge>\n";
    };
    auto right_mid = [](const Bounds& b) { return std::pair{b.x + b.width, b.y + b.height / 2}; };
    auto left_mid = [](const Bounds& b) { return std::pair{b.x, b.y + b.height / 2}; };
    auto bottom_mid = [](const Bounds& b) { return std::pair{b.x + b.width / 2, b.y + b.height}; };
    auto top_mid = [](const Bounds& b) { return std::pair{b.x + b.width / 2, b.y}; };
    for (const auto& f : g.sequence_flows) edge(f.id, right_mid(pos(f.source)), left_mid(pos(f.target)));
    for (const auto& f : g.message_flows) {
        auto s = pos(f.source);
        auto t = pos(f.target);
        if (s.y < t.y) {
            edge(f.id, bottom_mid(s), top_mid(t));
        } else {
            edge(f.id, top_mid(s), bottom_mid(t));
        }
    }
    for (const auto& a : g.data_associations) {
        if (a.direction == Direction::input) {
            edge(a.id, top_mid(pos(a.data_object)), bottom_mid(pos(a.task)));
        } else {
            edge(a.id, bottom_mid(pos(a.task)), top_mid(pos(a.data_object)));
        }
    }
    o << "    </bpmndi:BPMNPlane>\n"
      << "  </bpmndi:BPMNDiagram>\n"
      << "</bpmn:definitions>\n";
    return o.str();
}

namespace {

using boost::property_tree::ptree;

std::string attr(const ptree& node, const std::string& name) {
    return node.get<std::string>("<xmlattr>." + name, "");
}

std::optional<std::string> opt_attr(const ptree& node, const std::string& name) {
    auto v = node.get_optional<std::string>("<xmlattr>." + name);
    if (!v) return std::nullopt;
    return *v;
}

const ptree& child(const ptree& node, const std::string& name) {
    auto c = node.get_child_optional(name);
    if (!c) throw LoadError("BPMN document lacks <" + name + ">");
    return *c;
}

std::optional<NodeKind> kind_of_tag(const std::string& tag) {
    if (tag == "bpmn:task") return NodeKind::task;
    if (tag == "bpmn:exclusiveGateway") return NodeKind::xor_gateway;
    if (tag == "bpmn:parallelGateway") return NodeKind::and_gateway;
    if (tag == "bpmn:startEvent") return NodeKind::start_event;
    if (tag == "bpmn:endEvent") return NodeKind::end_event;
    if (tag == "bpmn:dataObjectReference") return NodeKind::data_object;
    return std::nullopt;
}

Bounds bounds_of(const ptree& shape) {
    const auto& b = child(shape, "dc:Bounds");
    return {b.get<int>("<xmlattr>.x"), b.get<int>("<xmlattr>.y"), b.get<int>("<xmlattr>.width"),
            b.get<int>("<xmlattr>.height")};
}

} // namespace

LayoutedModel parse_bpmn(const std::string& xml) {
    ptree tree;
    try {
        std::istringstream in(xml);
        boost::property_tree::read_xml(in, tree);
    } catch (const boost::property_tree::xml_parser_error& e) {
        throw LoadError(std::string("malformed BPMN XML: ") + e.what());
    }

    LayoutedModel model;
    auto& g = model.graph;
    try {
        const auto& defs = child(tree, "bpmn:definitions");
        const auto& process = child(defs, "bpmn:process");

        std::map<std::string, std::string> lane_of_node;
        for (const auto& [tag, lane] : child(process, "bpmn:laneSet")) {
            if (tag != "bpmn:lane") continue;
            Lane l{attr(lane, "id"), attr(lane, "procx:actorEntity"), attr(lane, "name")};
            for (const auto& [ref_tag, ref] : lane) {
                if (ref_tag == "bpmn:flowNodeRef") lane_of_node[ref.get_value<std::string>()] = l.id;
            }
            g.lanes.push_back(std::move(l));
        }

        for (const auto& [tag, element] : process) {
            if (auto kind = kind_of_tag(tag)) {
                Node n{attr(element, "id"), *kind, attr(element, "name"), std::nullopt};
                if (auto it = lane_of_node.find(n.id); it != lane_of_node.end()) n.lane_id = it->second;
                for (const auto& [sub_tag, sub] : element) {
                    if (sub_tag == "bpmn:dataInputAssociation") {
                        g.data_associations.push_back(
                            {attr(sub, "id"), sub.get<std::string>("bpmn:sourceRef"), n.id, Direction::input});
                    } else if (sub_tag == "bpmn:dataOutputAssociation") {
                        g.data_associations.push_back(
                            {attr(sub, "id"), sub.get<std::string>("bpmn:targetRef"), n.id, Direction::output});
                    }
                }
                g.nodes.push_back(std::move(n));
            } else if (tag == "bpmn:sequenceFlow") {
                g.sequence_flows.push_back(
                    {attr(element, "id"), attr(element, "sourceRef"), attr(element, "targetRef"), opt_attr(element, "name")});
            }
        }

        for (const auto& [tag, element] : child(defs, "bpmn:collaboration")) {
            if (tag == "bpmn:messageFlow") {
                g.message_flows.push_back({attr(element, "id"), attr(element, "sourceRef"), attr(element, "targetRef")});
            }
        }

        std::set<std::string> lane_ids;
        for (const auto& l : g.lanes) lane_ids.insert(l.id);
        const auto& plane = child(child(defs, "bpmndi:BPMNDiagram"), "bpmndi:BPMNPlane");
        for (const auto& [tag, shape] : plane) {
            if (tag != "bpmndi:BPMNShape") continue;
            auto ref = attr(shape, "bpmnElement");
            auto b = bounds_of(shape);
            if (ref == "Participant_1") {
                model.pool = b;
            } else if (lane_ids.count(ref)) {
                model.lane_bounds[ref] = b;
            } else {
                model.positions[ref] = b;
            }
        }
    } catch (const boost::property_tree::ptree_error& e) {
        throw LoadError(std::string("unexpected BPMN structure: ") + e.what());
    }
    return model;
}

} // namespace procx::bpmn
