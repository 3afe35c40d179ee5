"""
Unit tests for base_agent module
"""
import pytest

from agents.base_agent import (
    AgentState,
    BaseAgent,
    WorkflowError,
    WorkflowState,
    WorkflowStateManager,
)
from core.errors import ToolkitError


class DummyAgent(BaseAgent):
    """Echo agent used to exercise the lifecycle hooks"""

    async def execute(self, input_data):
        if input_data == "boom":
            raise RuntimeError("exploded")
        return f"Processed: {input_data}"

    async def validate_input(self, input_data):
        return input_data is not None


@pytest.mark.asyncio
async def test_base_agent_creation():
    agent = DummyAgent("test_agent", {"key": "value"})
    assert agent.agent_id == "test_agent"
    assert agent.state == AgentState.IDLE
    assert agent.config["key"] == "value"


@pytest.mark.asyncio
async def test_run_completes():
    agent = DummyAgent("test_agent")
    assert await agent.run("data") == "Processed: data"
    assert agent.state == AgentState.COMPLETED


@pytest.mark.asyncio
async def test_run_rejects_invalid_input():
    agent = DummyAgent("test_agent")
    with pytest.raises(ToolkitError, match="invalid input"):
        await agent.run(None)
    assert agent.state == AgentState.ERROR


@pytest.mark.asyncio
async def test_run_propagates_errors():
    agent = DummyAgent("test_agent")
    with pytest.raises(RuntimeError):
        await agent.run("boom")
    assert agent.state == AgentState.ERROR


def test_workflow_state_manager():
    manager = WorkflowStateManager()
    assert manager.current_state == WorkflowState.INITIALIZED

    manager.transition_to(WorkflowState.DECODING)
    assert manager.current_state == WorkflowState.DECODING

    with pytest.raises(WorkflowError):
        manager.transition_to(WorkflowState.COMPLETED)


def test_workflow_state_checkpoint():
    manager = WorkflowStateManager()
    manager.transition_to(WorkflowState.DECODING)
    manager.transition_to(WorkflowState.NORMALIZING, checkpoint={"decoded": 5, "fallbacks": 1})

    assert manager.get_checkpoint(WorkflowState.NORMALIZING) == {"decoded": 5, "fallbacks": 1}
    assert manager.get_checkpoint(WorkflowState.DECODING) is None
    assert manager.stages == ("initialized", "decoding", "normalizing")


def test_normalize_only_path():
    manager = WorkflowStateManager()
    for state in (WorkflowState.NORMALIZING, WorkflowState.FILTERING, WorkflowState.COMPLETED):
        manager.transition_to(state)
    assert manager.stages[-1] == "completed"


def test_failed_is_terminal():
    manager = WorkflowStateManager()
    manager.transition_to(WorkflowState.FAILED)
    with pytest.raises(WorkflowError):
        manager.transition_to(WorkflowState.DECODING)
