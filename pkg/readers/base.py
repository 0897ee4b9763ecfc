from abc import ABC, abstractmethod

from models import Question


class BaseReader(ABC):
    """Base class for span readers: RC(Q, passage) -> answer text."""

    name: str = "reader"

    @abstractmethod
    def run(self, question: Question, passage_text: str) -> str:
        """
        Read one passage.

        Args:
            question: The question being answered
            passage_text: A linked passage, or flattened evidence in the baselines

        Returns:
            An answer span of passage_text, or "" to abstain
        """
        pass
