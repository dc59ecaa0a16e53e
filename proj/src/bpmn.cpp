#include "procx/bpmn.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>
#include <tuple>

#include "procx/text.hpp"

namespace procx::bpmn {

namespace {

bool is_role(const Mention& m, const std::string& role) {
    return !role.empty() && text::type_key(m.mention_type) == text::type_key(role);
}

bool is_gateway(const Mention& m, const BpmnRoles& r) { return is_role(m, r.xor_gateway) || is_role(m, r.and_gateway); }

bool relation_is(const Relation& rel, const std::string& role) {
    return !role.empty() && text::type_key(rel.relation_type) == text::type_key(role);
}

int first_token(const Mention& m) { return m.token_indices.front(); }
int last_token(const Mention& m) { return m.token_indices.back(); }

std::vector<const Mention*> in_text_order(const Document& doc, const std::function<bool(const Mention&)>& keep) {
    std::vector<const Mention*> out;
    for (const auto& m : doc.mentions) {
        if (keep(m)) out.push_back(&m);
    }
    std::stable_sort(out.begin(), out.end(), [](const Mention* a, const Mention* b) { return first_token(*a) < first_token(*b); });
    return out;
}

// Closest candidate strictly left of `anchor`, measured by last token; ties go to the later start.
const Mention* nearest_left(const Mention& anchor, const std::vector<const Mention*>& candidates) {
    const Mention* best = nullptr;
    for (const auto* c : candidates) {
        if (last_token(*c) >= first_token(anchor)) continue;
        if (!best || last_token(*c) > last_token(*best) ||
            (last_token(*c) == last_token(*best) && first_token(*c) > first_token(*best))) {
            best = c;
        }
    }
    return best;
}

int sentence_of(const Document& doc, const Mention& m) {
    auto idx = static_cast<std::size_t>(first_token(m));
    return idx < doc.tokens.size() ? doc.tokens[idx].sentence_index : 0;
}

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

std::string make_id(std::string_view prefix, std::string_view kind, std::string_view label, std::size_t ordinal) {
    std::string key(kind);
    key += '\x1f';
    key += label;
    key += '\x1f';
    key += std::to_string(ordinal);
    return std::string(prefix) + "_" + text::hex64(text::fnv1a64(key));
}

// Groups mentions by entity membership; mentions outside any entity form singletons.
// Groups are ordered by their first mention in text order; members are in text order.
struct Group {
    std::string entity_id;
    std::vector<const Mention*> members;
};

std::vector<Group> group_by_entity(const Document& doc, const std::vector<const Mention*>& mentions) {
    std::map<std::string, std::string> entity_id_of;
    for (const auto& e : doc.entities) {
        for (const auto& id : e.mention_ids) entity_id_of.emplace(id, e.id);
    }
    std::vector<Group> groups;
    std::map<std::string, std::size_t> group_index;
    for (const auto* m : mentions) {
        auto it = entity_id_of.find(m->id);
        std::string key = it == entity_id_of.end() ? m->id : it->second;
        auto [slot, inserted] = group_index.emplace(key, groups.size());
        if (inserted) groups.push_back({key, {}});
        groups[slot->second].members.push_back(m);
    }
    return groups;
}

std::string longest_surface(const Document& doc, const Group& g) {
    std::string best;
    for (const auto* m : g.members) {
        auto s = doc.surface(*m);
        if (s.size() > best.size()) best = std::move(s);
    }
    return best;
}

} // namespace

std::string_view to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::task: return "task";
        case NodeKind::xor_gateway: return "xor_gateway";
        case NodeKind::and_gateway: return "and_gateway";
        case NodeKind::start_event: return "start_event";
        case NodeKind::end_event: return "end_event";
        case NodeKind::data_object: return "data_object";
    }
    return "?";
}

const Node* ProcessGraph::find_node(std::string_view id) const {
    for (const auto& n : nodes) {
        if (n.id == id) return &n;
    }
    return nullptr;
}

const Lane* ProcessGraph::find_lane(std::string_view id) const {
    for (const auto& l : lanes) {
        if (l.id == id) return &l;
    }
    return nullptr;
}

std::vector<std::string> ProcessGraph::validate() const {
    std::vector<std::string> problems;
    std::set<std::string> ids;
    for (const auto& l : lanes) {
        if (!ids.insert(l.id).second) problems.push_back("duplicate id " + l.id);
    }
    int starts = 0, ends = 0;
    for (const auto& n : nodes) {
        if (!ids.insert(n.id).second) problems.push_back("duplicate id " + n.id);
        if (n.kind == NodeKind::data_object) {
            if (n.lane_id) problems.push_back("data object " + n.id + " has a lane");
        } else if (!n.lane_id || !find_lane(*n.lane_id)) {
            problems.push_back("node " + n.id + " has no valid lane");
        }
        starts += n.kind == NodeKind::start_event;
        ends += n.kind == NodeKind::end_event;
    }
    if (starts != 1) problems.push_back("expected exactly one start event, found " + std::to_string(starts));
    if (ends < 1) problems.push_back("expected at least one end event");

    auto flow_node = [&](const std::string& id, const std::string& flow) -> const Node* {
        const auto* n = find_node(id);
        if (!n) {
            problems.push_back(flow + " references unknown node " + id);
        } else if (n->kind == NodeKind::data_object) {
            problems.push_back(flow + " connects data object " + id);
            return nullptr;
        }
        return n;
    };
    for (const auto& f : sequence_flows) {
        if (!ids.insert(f.id).second) problems.push_back("duplicate id " + f.id);
        const auto* s = flow_node(f.source, f.id);
        const auto* t = flow_node(f.target, f.id);
        if (s && t && s->lane_id != t->lane_id) problems.push_back("sequence flow " + f.id + " crosses lanes");
    }
    for (const auto& f : message_flows) {
        if (!ids.insert(f.id).second) problems.push_back("duplicate id " + f.id);
        const auto* s = flow_node(f.source, f.id);
        const auto* t = flow_node(f.target, f.id);
        if (s && t && s->lane_id == t->lane_id) problems.push_back("message flow " + f.id + " stays within a lane");
    }
    for (const auto& a : data_associations) {
        if (!ids.insert(a.id).second) problems.push_back("duplicate id " + a.id);
        const auto* d = find_node(a.data_object);
        const auto* t = find_node(a.task);
        if (!d || d->kind != NodeKind::data_object) problems.push_back(a.id + " needs a data object");
        if (!t || t->kind != NodeKind::task) problems.push_back(a.id + " needs a task");
    }
    return problems;
}

Document consolidate(const Document& doc, const SchemaDescriptor& schema) {
    const auto& roles = schema.roles;
    Document out = doc;

    auto gateways = in_text_order(doc, [&](const Mention& m) { return is_gateway(m, roles); });

    // Conditions hang off the closest gateway before them.
    if (!roles.flow.empty()) {
        for (const auto* cond : in_text_order(doc, [&](const Mention& m) { return is_role(m, roles.condition); })) {
            bool attached = std::any_of(out.relations.begin(), out.relations.end(), [&](const Relation& r) {
                if (!relation_is(r, roles.flow) || r.target_mention_id != cond->id) return false;
                const auto* src = out.find_mention(r.source_mention_id);
                return src && is_gateway(*src, roles);
            });
            if (attached) continue;
            if (const auto* gw = nearest_left(*cond, gateways)) {
                out.relations.push_back({"c_cond_" + cond->id, roles.flow, gw->id, cond->id});
            }
        }
    }

    // Merge gateway mentions of one decision point.
    if (!gateways.empty()) {
        std::map<std::string, std::size_t> index;
        for (std::size_t i = 0; i < gateways.size(); ++i) index[gateways[i]->id] = i;
        UnionFind uf(gateways.size());
        if (!roles.same_gateway.empty()) {
            for (const auto& r : doc.relations) {
                if (!relation_is(r, roles.same_gateway)) continue;
                auto a = index.find(r.source_mention_id);
                auto b = index.find(r.target_mention_id);
                if (a != index.end() && b != index.end()) uf.unite(a->second, b->second);
            }
        } else {
            for (std::size_t i = 0; i < gateways.size(); ++i) {
                for (std::size_t j = i + 1; j < gateways.size(); ++j) {
                    if (sentence_of(doc, *gateways[i]) == sentence_of(doc, *gateways[j]) &&
                        text::type_key(gateways[i]->mention_type) == text::type_key(gateways[j]->mention_type)) {
                        uf.unite(i, j);
                    }
                }
            }
        }
        for (const auto& e : doc.entities) {
            std::optional<std::size_t> first;
            for (const auto& id : e.mention_ids) {
                auto it = index.find(id);
                if (it == index.end()) continue;
                if (first) {
                    uf.unite(*first, it->second);
                } else {
                    first = it->second;
                }
            }
        }
        std::map<std::size_t, std::vector<std::string>> groups;
        for (std::size_t i = 0; i < gateways.size(); ++i) groups[uf.find(i)].push_back(gateways[i]->id);
        std::set<std::string> merged;
        std::vector<Entity> added;
        for (const auto& [_, ids] : groups) {
            if (ids.size() < 2) continue;
            merged.insert(ids.begin(), ids.end());
            added.push_back({"g_" + ids.front(), ids});
        }
        if (!added.empty()) {
            std::vector<Entity> kept;
            for (auto e : out.entities) {
                std::erase_if(e.mention_ids, [&](const std::string& id) { return merged.count(id) != 0; });
                if (!e.mention_ids.empty()) kept.push_back(std::move(e));
            }
            kept.insert(kept.end(), added.begin(), added.end());
            out.entities = std::move(kept);
        }
    }

    // Activities without a performer take the nearest actor to their left.
    if (!roles.performer.empty()) {
        auto actors = in_text_order(doc, [&](const Mention& m) { return is_role(m, roles.actor); });
        for (const auto* act : in_text_order(doc, [&](const Mention& m) { return is_role(m, roles.activity); })) {
            bool has = std::any_of(out.relations.begin(), out.relations.end(), [&](const Relation& r) {
                return relation_is(r, roles.performer) && r.source_mention_id == act->id;
            });
            if (has) continue;
            if (const auto* actor = nearest_left(*act, actors)) {
                out.relations.push_back({"c_perf_" + act->id, roles.performer, act->id, actor->id});
            }
        }
    }
    return out;
}

VertexStage build_vertices(const Document& doc, const SchemaDescriptor& schema) {
    const auto& roles = schema.roles;
    VertexStage stage;
    auto& g = stage.graph;

    auto actors = in_text_order(doc, [&](const Mention& m) { return is_role(m, roles.actor); });
    std::map<std::string, std::string> lane_of_actor;
    std::size_t ordinal = 0;
    for (const auto& group : group_by_entity(doc, actors)) {
        Lane lane{"", group.entity_id, longest_surface(doc, group)};
        lane.id = make_id("Lane", "lane", lane.label, ordinal++);
        for (const auto* m : group.members) lane_of_actor[m->id] = lane.id;
        g.lanes.push_back(std::move(lane));
    }

    std::map<std::string, std::string> performer_of;
    for (const auto& r : doc.relations) {
        if (relation_is(r, roles.performer)) performer_of.emplace(r.source_mention_id, r.target_mention_id);
    }

    auto activities = in_text_order(doc, [&](const Mention& m) { return is_role(m, roles.activity); });
    std::map<std::string, std::string> lane_of_activity;
    bool need_unassigned = g.lanes.empty();
    for (const auto* a : activities) {
        auto p = performer_of.find(a->id);
        if (p != performer_of.end() && lane_of_actor.count(p->second)) {
            lane_of_activity[a->id] = lane_of_actor[p->second];
        } else {
            need_unassigned = true;
        }
    }
    if (need_unassigned) {
        Lane lane{make_id("Lane", "lane", kUnassignedLabel, ordinal++), "", std::string(kUnassignedLabel)};
        for (const auto* a : activities) lane_of_activity.emplace(a->id, lane.id);
        g.lanes.push_back(std::move(lane));
    }

    struct Pending {
        int first;
        Node node;
        std::vector<const Mention*> members;
    };
    std::vector<Pending> flow_nodes;
    std::size_t task_ordinal = 0;
    for (const auto* a : activities) {
        auto label = doc.surface(*a);
        Node n{make_id("Task", "task", label, task_ordinal++), NodeKind::task, label, lane_of_activity[a->id]};
        flow_nodes.push_back({first_token(*a), std::move(n), {a}});
    }

    auto gateways = in_text_order(doc, [&](const Mention& m) { return is_gateway(m, roles); });
    std::size_t gateway_ordinal = 0;
    for (const auto& group : group_by_entity(doc, gateways)) {
        const auto* head = group.members.front();
        const auto kind = is_role(*head, roles.and_gateway) ? NodeKind::and_gateway : NodeKind::xor_gateway;
        auto label = doc.surface(*head);
        // A gateway sits in the lane of the activity just before it, else the one just after.
        std::optional<std::string> lane;
        for (const auto* a : activities) {
            if (first_token(*a) < first_token(*head)) lane = lane_of_activity[a->id];
        }
        if (!lane) {
            for (const auto* a : activities) {
                if (first_token(*a) > first_token(*head)) {
                    lane = lane_of_activity[a->id];
                    break;
                }
            }
        }
        if (!lane) lane = g.lanes.front().id;
        Node n{make_id("Gateway", to_string(kind), label, gateway_ordinal++), kind, label, lane};
        flow_nodes.push_back({first_token(*head), std::move(n), group.members});
    }
    std::stable_sort(flow_nodes.begin(), flow_nodes.end(), [](const Pending& a, const Pending& b) { return a.first < b.first; });
    for (auto& p : flow_nodes) {
        for (const auto* m : p.members) stage.node_of_mention[m->id] = p.node.id;
        g.nodes.push_back(std::move(p.node));
    }

    auto data = in_text_order(doc, [&](const Mention& m) { return is_role(m, roles.data); });
    std::size_t data_ordinal = 0;
    for (const auto& group : group_by_entity(doc, data)) {
        auto label = doc.surface(*group.members.front());
        Node n{make_id("DataObjectReference", "data_object", label, data_ordinal++), NodeKind::data_object, label,
               std::nullopt};
        for (const auto* m : group.members) stage.node_of_mention[m->id] = n.id;
        g.nodes.push_back(std::move(n));
    }
    return stage;
}

LinkResult link(const VertexStage& stage, const Document& doc, const SchemaDescriptor& schema) {
    const auto& roles = schema.roles;
    LinkResult result;
    auto& g = result.graph;
    g.lanes = stage.graph.lanes;
    std::vector<Node> nodes = stage.graph.nodes;

    auto node_index = [&](const std::string& id) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (nodes[i].id == id) return i;
        }
        return std::nullopt;
    };
    auto flow_node_of = [&](const std::string& mention_id) -> std::optional<std::size_t> {
        auto it = stage.node_of_mention.find(mention_id);
        if (it == stage.node_of_mention.end()) return std::nullopt;
        auto idx = node_index(it->second);
        if (!idx || nodes[*idx].kind == NodeKind::data_object) return std::nullopt;
        return idx;
    };

    struct Edge {
        std::size_t source;
        std::size_t target;
        std::optional<std::string> label;
        bool operator==(const Edge&) const = default;
    };
    std::vector<Edge> edges;
    auto add_edge = [&](std::size_t s, std::size_t t, std::optional<std::string> label) {
        if (s == t) return;
        Edge e{s, t, std::move(label)};
        if (std::find(edges.begin(), edges.end(), e) == edges.end()) edges.push_back(std::move(e));
    };

    auto is_condition = [&](const Mention* m) { return m && is_role(*m, roles.condition); };
    for (const auto& r : doc.relations) {
        if (!relation_is(r, roles.flow)) continue;
        const auto* src = doc.find_mention(r.source_mention_id);
        const auto* tgt = doc.find_mention(r.target_mention_id);
        if (is_condition(src)) continue; // consumed together with the gateway -> condition link
        if (is_condition(tgt)) {
            auto s = flow_node_of(r.source_mention_id);
            bool any = false;
            for (const auto& r2 : doc.relations) {
                if (!relation_is(r2, roles.flow) || r2.source_mention_id != tgt->id) continue;
                auto t = flow_node_of(r2.target_mention_id);
                if (s && t) {
                    add_edge(*s, *t, doc.surface(*tgt));
                    any = true;
                }
            }
            if (!any) result.warnings.push_back("skipped flow " + r.id + ": condition '" + doc.surface(*tgt) + "' leads nowhere");
            continue;
        }
        auto s = flow_node_of(r.source_mention_id);
        auto t = flow_node_of(r.target_mention_id);
        if (!s || !t) {
            result.warnings.push_back("skipped flow " + r.id + ": endpoint is not an activity or gateway");
            continue;
        }
        add_edge(*s, *t, std::nullopt);
    }

    // Uses relations: data association plus task label completion.
    struct Assoc {
        std::size_t task;
        std::size_t data;
    };
    std::vector<Assoc> assocs;
    std::set<std::size_t> relabeled;
    for (const auto& r : doc.relations) {
        if (!relation_is(r, roles.uses)) continue;
        auto t_it = stage.node_of_mention.find(r.source_mention_id);
        auto d_it = stage.node_of_mention.find(r.target_mention_id);
        std::optional<std::size_t> t, d;
        if (t_it != stage.node_of_mention.end()) t = node_index(t_it->second);
        if (d_it != stage.node_of_mention.end()) d = node_index(d_it->second);
        if (!t || !d || nodes[*t].kind != NodeKind::task || nodes[*d].kind != NodeKind::data_object) {
            result.warnings.push_back("skipped uses " + r.id + ": expected activity -> data");
            continue;
        }
        if (std::none_of(assocs.begin(), assocs.end(), [&](const Assoc& a) { return a.task == *t && a.data == *d; })) {
            assocs.push_back({*t, *d});
        }
        if (relabeled.insert(*t).second) {
            auto surface = doc.surface(*doc.find_mention(r.target_mention_id));
            auto& label = nodes[*t].label;
            if (text::normalize_surface(label).find(text::normalize_surface(surface)) == std::string::npos) {
                label += " " + surface;
            }
        }
    }

    // Start and end events.
    std::vector<std::size_t> flow_nodes;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].kind != NodeKind::data_object) flow_nodes.push_back(i);
    }
    std::set<std::size_t> has_in, has_out;
    for (const auto& e : edges) {
        has_out.insert(e.source);
        has_in.insert(e.target);
    }
    std::vector<Node> starts, ends;
    std::vector<std::pair<std::string, std::size_t>> start_links; // start id -> node
    std::vector<std::pair<std::size_t, std::string>> end_links;   // node -> end id
    if (flow_nodes.empty()) {
        const auto& lane = g.lanes.front().id;
        starts.push_back({make_id("StartEvent", "start_event", "start", 0), NodeKind::start_event, "start", lane});
        ends.push_back({make_id("EndEvent", "end_event", "end", 0), NodeKind::end_event, "end", lane});
    } else {
        std::size_t entry = flow_nodes.front();
        for (auto i : flow_nodes) {
            if (!has_in.count(i)) {
                entry = i;
                break;
            }
        }
        starts.push_back({make_id("StartEvent", "start_event", "start", 0), NodeKind::start_event, "start",
                          nodes[entry].lane_id});
        start_links.emplace_back(starts.back().id, entry);
        for (const auto& lane : g.lanes) {
            std::vector<std::size_t> terminals;
            for (auto i : flow_nodes) {
                if (nodes[i].lane_id == lane.id && !has_out.count(i)) terminals.push_back(i);
            }
            if (terminals.empty()) continue;
            ends.push_back({make_id("EndEvent", "end_event", "end", ends.size()), NodeKind::end_event, "end", lane.id});
            for (auto i : terminals) end_links.emplace_back(i, ends.back().id);
        }
        if (ends.empty()) {
            auto last = flow_nodes.back();
            ends.push_back({make_id("EndEvent", "end_event", "end", 0), NodeKind::end_event, "end", nodes[last].lane_id});
            end_links.emplace_back(last, ends.back().id);
        }
    }

    g.nodes = starts;
    for (auto i : flow_nodes) g.nodes.push_back(nodes[i]);
    g.nodes.insert(g.nodes.end(), ends.begin(), ends.end());
    for (const auto& n : nodes) {
        if (n.kind == NodeKind::data_object) g.nodes.push_back(n);
    }

    std::size_t seq_ordinal = 0, msg_ordinal = 0;
    auto add_sequence = [&](const std::string& s, const std::string& t, std::optional<std::string> label) {
        g.sequence_flows.push_back({make_id("Flow", "sequence_flow", s + ">" + t, seq_ordinal++), s, t, std::move(label)});
    };
    if (flow_nodes.empty()) add_sequence(starts.front().id, ends.front().id, std::nullopt);
    for (const auto& [s, i] : start_links) add_sequence(s, nodes[i].id, std::nullopt);
    for (const auto& e : edges) {
        const auto& s = nodes[e.source];
        const auto& t = nodes[e.target];
        if (s.lane_id == t.lane_id) {
            add_sequence(s.id, t.id, e.label);
        } else {
            g.message_flows.push_back({make_id("MessageFlow", "message_flow", s.id + ">" + t.id, msg_ordinal++), s.id, t.id});
        }
    }
    for (const auto& [i, e] : end_links) add_sequence(nodes[i].id, e, std::nullopt);

    std::stable_sort(assocs.begin(), assocs.end(), [](const Assoc& a, const Assoc& b) {
        return std::tie(a.task, a.data) < std::tie(b.task, b.data);
    });
    std::size_t assoc_ordinal = 0;
    for (const auto& a : assocs) {
        const auto& t = nodes[a.task].id;
        const auto& d = nodes[a.data].id;
        g.data_associations.push_back(
            {make_id("DataInputAssociation", "data_input", d + ">" + t, assoc_ordinal++), d, t, Direction::input});
    }
    return result;
}

LayoutedModel layout(const ProcessGraph& graph) {
    LayoutedModel model;
    model.graph = graph;

    std::vector<std::size_t> flow_nodes;
    std::map<std::string, std::size_t> slot;
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        if (graph.nodes[i].kind == NodeKind::data_object) continue;
        slot[graph.nodes[i].id] = flow_nodes.size();
        flow_nodes.push_back(i);
    }
    const auto n = flow_nodes.size();
    std::vector<std::vector<std::size_t>> succ(n);
    std::vector<int> indegree(n, 0);
    auto add = [&](const std::string& s, const std::string& t) {
        auto a = slot.find(s);
        auto b = slot.find(t);
        if (a == slot.end() || b == slot.end()) return;
        succ[a->second].push_back(b->second);
        ++indegree[b->second];
    };
    for (const auto& f : graph.sequence_flows) add(f.source, f.target);
    for (const auto& f : graph.message_flows) add(f.source, f.target);

    // Kahn's algorithm, always taking the lowest-index ready node.
    std::vector<std::size_t> order;
    std::set<std::size_t> ready;
    for (std::size_t i = 0; i < n; ++i) {
        if (indegree[i] == 0) ready.insert(i);
    }
    while (!ready.empty()) {
        auto i = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(i);
        for (auto j : succ[i]) {
            if (--indegree[j] == 0) ready.insert(j);
        }
    }
    if (order.size() != n) {
        order.resize(n);
        std::iota(order.begin(), order.end(), 0);
    }
    std::vector<int> column(n);
    for (std::size_t pos = 0; pos < order.size(); ++pos) column[order[pos]] = static_cast<int>(pos);

    std::map<std::string, int> lane_row;
    for (std::size_t i = 0; i < graph.lanes.size(); ++i) lane_row[graph.lanes[i].id] = static_cast<int>(i);

    const int columns = std::max<int>(1, static_cast<int>(n));
    const int lane_width = columns * kColumnWidth + 50;
    const int origin = kPoolHeaderWidth + 25;
    auto size_of = [](NodeKind k) -> std::pair<int, int> {
        switch (k) {
            case NodeKind::task: return {100, 80};
            case NodeKind::xor_gateway:
            case NodeKind::and_gateway: return {50, 50};
            case NodeKind::start_event:
            case NodeKind::end_event: return {36, 36};
            case NodeKind::data_object: return {36, 50};
        }
        return {0, 0};
    };

    for (std::size_t k = 0; k < n; ++k) {
        const auto& node = graph.nodes[flow_nodes[k]];
        auto [w, h] = size_of(node.kind);
        const int row = node.lane_id ? lane_row[*node.lane_id] : 0;
        const int cx = origin + column[k] * kColumnWidth + kColumnWidth / 2;
        model.positions[node.id] = {cx - w / 2, row * kLaneHeight + (kLaneHeight - h) / 2, w, h};
    }

    // Data objects sit in a row below the pool, under their first associated task.
    const int data_y = static_cast<int>(graph.lanes.size()) * kLaneHeight + 30;
    std::set<int> taken;
    int spare_column = columns;
    for (const auto& node : graph.nodes) {
        if (node.kind != NodeKind::data_object) continue;
        auto [w, h] = size_of(node.kind);
        int cx = 0;
        auto a = std::find_if(graph.data_associations.begin(), graph.data_associations.end(),
                              [&](const DataAssociation& d) { return d.data_object == node.id; });
        if (a != graph.data_associations.end() && model.positions.count(a->task)) {
            const auto& t = model.positions[a->task];
            cx = t.x + t.width / 2;
        } else {
            cx = origin + spare_column++ * kColumnWidth + kColumnWidth / 2;
        }
        int x = cx - w / 2;
        while (taken.count(x)) x += w + 14;
        taken.insert(x);
        model.positions[node.id] = {x, data_y, w, h};
    }

    for (std::size_t i = 0; i < graph.lanes.size(); ++i) {
        model.lane_bounds[graph.lanes[i].id] = {kPoolHeaderWidth, static_cast<int>(i) * kLaneHeight, lane_width, kLaneHeight};
    }
    model.pool = {0, 0, lane_width + kPoolHeaderWidth, static_cast<int>(graph.lanes.size()) * kLaneHeight};
    return model;
}

GeneratedModel generate(const Document& doc, const SchemaDescriptor& schema) {
    auto consolidated = consolidate(doc, schema);
    auto stage = build_vertices(consolidated, schema);
    auto linked = link(stage, consolidated, schema);
    GeneratedModel out;
    out.model = layout(linked.graph);
    out.xml = serialize_bpmn(out.model);
    out.warnings = std::move(linked.warnings);
    return out;
}

} // namespace procx::bpmn
