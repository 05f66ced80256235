/** Digit keys label the current item; arrows move around the batch. */

import type { LabelingConsole } from "./console.js";

export function bindKeyboard(target: Window, console_: LabelingConsole, numClasses: number): () => void {
  const handler = (event: KeyboardEvent) => {
    if (event.target instanceof HTMLInputElement || event.target instanceof HTMLTextAreaElement) {
      return;
    }
    if (event.key >= "0" && event.key <= "9") {
      const classId = Number(event.key);
      if (classId < numClasses) {
        event.preventDefault();
        void console_.labelCurrent(classId);
      }
      return;
    }
    if (event.key === "ArrowRight") {
      event.preventDefault();
      console_.next();
    } else if (event.key === "ArrowLeft") {
      event.preventDefault();
      console_.previous();
    }
  };
  target.addEventListener("keydown", handler as EventListener);
  return () => target.removeEventListener("keydown", handler as EventListener);
}
