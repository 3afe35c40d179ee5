"""Base Agent and pipeline workflow state"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from core.errors import ToolkitError
from utils.logger import get_logger


class AgentState(Enum):
    """Agent lifecycle"""
    IDLE = "idle"
    RUNNING = "running"
    COMPLETED = "completed"
    ERROR = "error"


class WorkflowState(Enum):
    """Pipeline stages"""
    INITIALIZED = "initialized"
    DECODING = "decoding"
    NORMALIZING = "normalizing"
    FILTERING = "filtering"
    EVALUATING = "evaluating"
    COMPLETED = "completed"
    FAILED = "failed"


class WorkflowError(ToolkitError):
    """Raised on an invalid stage transition"""


@dataclass(frozen=True)
class StageRecord:
    """One transition, in order"""
    state: WorkflowState
    summary: Optional[Dict[str, Any]] = None


class BaseAgent(ABC):
    """Common interface of every pipeline stage"""

    def __init__(self, agent_id: str, config: Optional[Dict[str, Any]] = None):
        """
        Initialize agent

        Args:
            agent_id: Unique agent identifier
            config: Agent configuration
        """
        self.agent_id = agent_id
        self.config = config or {}
        self.logger = get_logger(f"agents.{agent_id}", agent=agent_id)
        self.state = AgentState.IDLE

    @abstractmethod
    async def execute(self, input_data: Any) -> Any:
        """
        Run the stage

        Args:
            input_data: Stage input

        Returns:
            Stage output
        """

    @abstractmethod
    async def validate_input(self, input_data: Any) -> bool:
        """
        Check the stage input

        Args:
            input_data: Input to check

        Returns:
            True when the input is usable
        """

    async def run(self, input_data: Any) -> Any:
        """validate_input, execute, then the completion or error hook"""
        self.state = AgentState.RUNNING
        try:
            if not await self.validate_input(input_data):
                raise ToolkitError(f"{self.agent_id}: invalid input")
            result = await self.execute(input_data)
        except Exception as e:
            await self.on_error(e)
            raise
        await self.on_complete(result)
        return result

    async def on_error(self, error: Exception) -> None:
        """
        Error hook

        Args:
            error: Raised exception
        """
        self.logger.error(f"Agent {self.agent_id} failed: {error}")
        self.state = AgentState.ERROR

    async def on_complete(self, result: Any) -> None:
        """
        Completion hook

        Args:
            result: Stage output
        """
        self.logger.debug(f"Agent {self.agent_id} completed")
        self.state = AgentState.COMPLETED


class WorkflowStateManager:
    """Tracks pipeline stage transitions and per-stage checkpoints"""

    _VALID_TRANSITIONS = {
        WorkflowState.INITIALIZED: [WorkflowState.DECODING, WorkflowState.NORMALIZING, WorkflowState.FAILED],
        WorkflowState.DECODING: [WorkflowState.NORMALIZING, WorkflowState.FAILED],
        WorkflowState.NORMALIZING: [WorkflowState.FILTERING, WorkflowState.FAILED],
        WorkflowState.FILTERING: [WorkflowState.EVALUATING, WorkflowState.COMPLETED, WorkflowState.FAILED],
        WorkflowState.EVALUATING: [WorkflowState.COMPLETED, WorkflowState.FAILED],
    }

    def __init__(self):
        self.current_state = WorkflowState.INITIALIZED
        self.state_history: List[StageRecord] = [StageRecord(WorkflowState.INITIALIZED)]
        self.checkpoint_data: Dict[str, Dict[str, Any]] = {}

    def transition_to(self, new_state: WorkflowState, checkpoint: Optional[Dict[str, Any]] = None):
        """
        Move to a new stage

        Args:
            new_state: Target stage
            checkpoint: Stage summary kept for the report

        Raises:
            WorkflowError: Transition not allowed from the current stage
        """
        if not self._is_valid_transition(self.current_state, new_state):
            raise WorkflowError(
                f"Invalid state transition: {self.current_state.value} -> {new_state.value}"
            )
        self.current_state = new_state
        self.state_history.append(StageRecord(new_state, checkpoint))
        if checkpoint:
            self.checkpoint_data[new_state.value] = checkpoint

    def _is_valid_transition(self, from_state: WorkflowState, to_state: WorkflowState) -> bool:
        return to_state in self._VALID_TRANSITIONS.get(from_state, [])

    def get_checkpoint(self, state: WorkflowState) -> Optional[Dict[str, Any]]:
        return self.checkpoint_data.get(state.value)

    @property
    def stages(self) -> Tuple[str, ...]:
        return tuple(record.state.value for record in self.state_history)
