import { SurveyApi } from "./api.js";
import { AdminApp } from "./admin.js";
import { SurveyApp } from "./app.js";

function mount(): void {
  const root = document.getElementById("app");
  if (!root) {
    throw new Error("missing #app container");
  }
  const api = new SurveyApi("");
  if (window.location.hash.startsWith("#/admin")) {
    void new AdminApp(root, api).render();
  } else {
    new SurveyApp(root, api).renderJoin();
  }
}

window.addEventListener("hashchange", mount);
mount();
