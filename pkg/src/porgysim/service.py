"""HTTP/WebSocket service for interactive exploration.

One session = one loaded graph + model + derivation tree + a cursor into
that tree. Mutating calls on a session are serialized: a second mutation
arriving while one is running is rejected with 409. Every application,
selection and cursor move is broadcast on the session's event channel so
connected views stay linked.
"""

from __future__ import annotations

import asyncio
import itertools
import random
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect

from . import graphio
from .errors import EngineError, ParseError
from .graph import LocatedGraph
from .models import (ModelConfig, builtin_rules, builtin_strategy_text,
                     setup_simulation)
from .rewrite import apply_rule, find_matches
from .rules import RewriteRule, rule_from_json
from .strategy import (Budget, evaluate_filter, parse_filter, parse_strategy,
                       run_rounds)
from .trace import DerivationTree


@dataclass
class Session:
    id: str
    config: ModelConfig
    tree: DerivationTree
    library: dict[str, RewriteRule]
    program: object
    located: LocatedGraph
    cursor: int
    rng: random.Random
    busy: bool = False
    subscribers: list[WebSocket] = field(default_factory=list)

    async def broadcast(self, kind: str, payload: dict) -> None:
        message = {"type": kind, "payload": payload}
        dead = []
        for ws in self.subscribers:
            try:
                await ws.send_json(message)
            except Exception:
                dead.append(ws)
        for ws in dead:
            self.subscribers.remove(ws)


def create_app() -> FastAPI:
    app = FastAPI(title="porgysim")
    sessions: dict[str, Session] = {}
    ids = itertools.count(1)

    def get_session(sid: str) -> Session:
        session = sessions.get(sid)
        if session is None:
            raise HTTPException(404, f"unknown session {sid}")
        return session

    def engine_error(exc: EngineError) -> HTTPException:
        return HTTPException(400, f"{exc.code}: {exc}")

    @app.post("/validate")
    async def validate(body: dict):
        out = {}
        try:
            if "strategy" in body:
                program = parse_strategy(body["strategy"])
                out["strategy"] = {"instructions": len(program)}
            if "rules" in body:
                names = [rule_from_json(doc).name for doc in body["rules"]]
                out["rules"] = {"names": names}
            if "graph" in body:
                graph = graphio.graph_from_json(body["graph"])
                if isinstance(graph, LocatedGraph):
                    graph = graph.graph
                out["graph"] = {"nodes": len(graph.nodes), "edges": len(graph.edges)}
        except ParseError as exc:
            raise HTTPException(400, {"code": exc.code, "message": str(exc),
                                      "line": exc.line, "column": exc.column})
        except EngineError as exc:
            raise HTTPException(400, {"code": exc.code, "message": str(exc)})
        if not out:
            raise HTTPException(400, "nothing to validate")
        return out

    @app.post("/sessions", status_code=201)
    async def create_session(body: dict):
        try:
            graph = graphio.graph_from_json(body["graph"])
            if isinstance(graph, LocatedGraph):
                graph = graph.graph
            config = ModelConfig(
                model=body.get("model", "ic"),
                seeds=tuple(body.get("seeds", ())),
                p=body.get("p", "const:0.5"),
                theta=body.get("theta"),
                rng_seed=body.get("rng", 0),
                max_rounds=body.get("max_rounds", 100),
                mode=body.get("mode", "random"),
                strict_sigma=body.get("strict_sigma", False),
            )
            rng = random.Random(config.rng_seed)
            located = setup_simulation(graph, config, rng)
            library = builtin_rules(config.model)
            if "rules" in body:
                for doc in body["rules"]:
                    rule = rule_from_json(doc)
                    library[rule.name] = rule
            text = body.get("strategy") or builtin_strategy_text(
                config.model, config.strict_sigma)
            program = parse_strategy(text)
        except KeyError as exc:
            raise HTTPException(400, f"missing field {exc}")
        except EngineError as exc:
            raise engine_error(exc)
        sid = f"s{next(ids)}"
        tree = DerivationTree(located.graph)
        sessions[sid] = Session(sid, config, tree, library, program, located,
                                tree.root_id, rng)
        return {"session": sid, "root": tree.root_id}

    def begin_mutation(session: Session) -> None:
        if session.busy:
            raise HTTPException(409, "a mutation is already running on this session")
        session.busy = True

    @app.post("/sessions/{sid}/rounds")
    async def post_rounds(sid: str, body: dict | None = None):
        session = get_session(sid)
        n = (body or {}).get("n", 1)
        if not isinstance(n, int) or n < 1:
            raise HTTPException(400, "n must be a positive integer")
        begin_mutation(session)
        try:
            outcomes = await asyncio.to_thread(
                run_rounds, session.program, session.located, session.library,
                session.rng, session.config.mode, session.tree, n,
                session.cursor, Budget(session.config.budget), session.config.eps)
        except EngineError as exc:
            raise engine_error(exc)
        finally:
            session.busy = False
        session.located = outcomes[-1].located
        session.cursor = outcomes[-1].final_state
        for outcome in outcomes:
            for step in outcome.log:
                await session.broadcast("applied", {
                    "rule": step.rule, "parent": step.parent_state,
                    "child": step.child_state,
                    "image": step.summary.get("image", []),
                    "group": outcome.step_group,
                })
        return {
            "rounds": [{"status": o.status, "applications": len(o.log),
                        "final_state": o.final_state, "group": o.step_group,
                        "error": o.error} for o in outcomes],
            "cursor": session.cursor,
        }

    @app.post("/sessions/{sid}/apply")
    async def post_apply(sid: str, body: dict):
        session = get_session(sid)
        rule_name = body.get("rule")
        rule = session.library.get(rule_name)
        if rule is None:
            raise HTTPException(400, f"unknown rule {rule_name!r}")
        choice = body.get("match", "random")
        begin_mutation(session)
        try:
            matches = find_matches(rule, session.located, None, "deterministic",
                                   session.config.eps)
            if not matches:
                return {"applied": False, "reason": "no match"}
            if choice == "random":
                match = matches[session.rng.randrange(len(matches))]
            else:
                wanted = set(choice)
                match = next((m for m in matches if wanted <= m.image()), None)
                if match is None:
                    raise HTTPException(404, "no match covers the given elements")
            gid = session.tree.open_step(session.cursor, label=f"apply {rule_name}")
            result = await asyncio.to_thread(
                apply_rule, rule, match, session.located, session.rng,
                session.tree.alloc)
            child = session.tree.commit_delta(session.cursor, result.delta,
                                              rule.name, result.summary, gid)
            session.tree.close_step(gid)
        except EngineError as exc:
            raise engine_error(exc)
        finally:
            session.busy = False
        parent = session.cursor
        session.located = result.located
        session.cursor = child
        await session.broadcast("applied", {
            "rule": rule.name, "parent": parent, "child": child,
            "image": result.summary.get("image", []), "group": gid,
        })
        return {"applied": True, "parent": parent, "child": child,
                "image": result.summary.get("image", [])}

    @app.post("/sessions/{sid}/setpos")
    async def post_setpos(sid: str, body: dict):
        session = get_session(sid)
        text = body.get("filter", "")
        try:
            flt = parse_filter(text)
            ids_ = evaluate_filter(flt, session.located.graph, session.config.eps)
        except ParseError as exc:
            raise HTTPException(400, f"{exc.code}: {exc}")
        session.located = LocatedGraph(session.located.graph, ids_,
                                       session.located.banned)
        return {"position": sorted(ids_)}

    @app.post("/sessions/{sid}/branch")
    async def post_branch(sid: str, body: dict):
        session = get_session(sid)
        state = body.get("state")
        try:
            graph = session.tree.state(state)
        except EngineError as exc:
            raise HTTPException(404, f"{exc.code}: {exc}")
        session.cursor = state
        session.located = LocatedGraph.whole(graph)
        await session.broadcast("branch", {"cursor": state})
        return {"cursor": state}

    @app.post("/sessions/{sid}/selection")
    async def post_selection(sid: str, body: dict):
        session = get_session(sid)
        elements = sorted(body.get("elements", []))
        await session.broadcast("selection", {"elements": elements})
        return {"elements": elements}

    @app.get("/sessions/{sid}/tree")
    async def get_tree(sid: str):
        session = get_session(sid)
        doc = session.tree.skeleton()
        doc["cursor"] = session.cursor
        return doc

    @app.get("/sessions/{sid}/states/{state}")
    async def get_state(sid: str, state: int):
        session = get_session(sid)
        try:
            graph = session.tree.state(state)
        except EngineError as exc:
            raise HTTPException(404, f"{exc.code}: {exc}")
        return graphio.graph_to_json(graph)

    @app.get("/sessions/{sid}/metrics")
    async def get_metrics(sid: str, leaf: int | None = None):
        session = get_session(sid)
        target = session.cursor if leaf is None else leaf
        try:
            series = session.tree.compute_metrics(target,
                                                  label=session.config.model)
        except EngineError as exc:
            raise HTTPException(404, f"{exc.code}: {exc}")
        return {
            "leaf": series.leaf, "label": series.label,
            "steps": list(series.steps), "active": list(series.active),
            "visited": list(series.visited),
            "efficiency": list(series.efficiency),
            "states": list(series.state_ids),
        }

    @app.get("/sessions/{sid}/trace/{element_id}")
    async def get_trace(sid: str, element_id: int):
        session = get_session(sid)
        try:
            snapshots = session.tree.trace_element(element_id)
        except EngineError as exc:
            raise HTTPException(404, f"{exc.code}: {exc}")
        return {"element": element_id,
                "snapshots": [{"state": s.state,
                               "record": graphio.record_to_json(s.record),
                               "changed": s.changed} for s in snapshots]}

    @app.websocket("/sessions/{sid}/events")
    async def events(ws: WebSocket, sid: str):
        session = sessions.get(sid)
        if session is None:
            await ws.close(code=4004)
            return
        await ws.accept()
        session.subscribers.append(ws)
        try:
            while True:
                message = await ws.receive_json()
                # clients may publish selections straight over the channel
                if isinstance(message, dict) and message.get("type") == "selection":
                    payload = message.get("payload", {})
                    await session.broadcast("selection", {
                        "elements": sorted(payload.get("elements", []))})
        except WebSocketDisconnect:
            pass
        finally:
            if ws in session.subscribers:
                session.subscribers.remove(ws)

    return app


app = create_app()
